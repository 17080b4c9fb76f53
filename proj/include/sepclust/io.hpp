#pragma once

#include "sepclust/analysis.hpp"
#include "sepclust/cluster.hpp"
#include "sepclust/matrix.hpp"
#include "sepclust/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sepclust::io {

// Doubles are printed with "%.17g" so every file round-trips bit-exactly and
// repeated runs produce byte-identical output.
std::string format_double(double v);

/// CSV: one row per line, comma separated, '.' radix. Lines starting with '#'
/// are comments (used for the self-description header).
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& comment = "");
Matrix read_matrix_csv(const std::filesystem::path& path);

/// JSON wrapper {n, d, data:[row-major]}.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Labels JSON {k, labels:[...]} plus any extra self-description fields.
void write_labels_json(const std::filesystem::path& path, std::size_t k,
                       const std::vector<int>& labels, const nlohmann::json& extra = {});
std::pair<std::size_t, std::vector<int>> read_labels_json(const std::filesystem::path& path);

nlohmann::json cluster_result_to_json(const ClusterRunResult& run);

nlohmann::json check_to_json(const InequalityCheck& check);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// FNV-1a 64 over a string; used for the embedded config hashes.
std::uint64_t fnv1a(const std::string& text);
std::string hash_hex(std::uint64_t h);

} // namespace sepclust::io
