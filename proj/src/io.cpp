#include "sepclust/io.hpp"

#include "sepclust/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sepclust::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& comment) {
    std::ostringstream out;
    if (!comment.empty()) out << "# " << comment << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    write_text(path, out.str());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t next = line.find(',', pos);
            std::string cell = line.substr(pos, next == std::string::npos ? next : next - pos);
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw input_error("bad CSV cell '" + cell + "' in " + path.string());
            }
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw input_error("empty CSV " + path.string());
    return Matrix::from_rows(rows);
}

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"n", m.rows()}, {"d", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("n").get<std::size_t>(), j.at("d").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) throw input_error("matrix JSON: data size mismatch");
    m.data() = std::move(data);
    return m;
}

void write_labels_json(const std::filesystem::path& path, std::size_t k,
                       const std::vector<int>& labels, const nlohmann::json& extra) {
    nlohmann::json j = {{"k", k}, {"labels", labels}};
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_text(path, j.dump(2) + "\n");
}

std::pair<std::size_t, std::vector<int>> read_labels_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw input_error("bad labels JSON " + path.string() + ": " + e.what());
    }
    try {
        return {j.at("k").get<std::size_t>(), j.at("labels").get<std::vector<int>>()};
    } catch (const nlohmann::json::exception& e) {
        throw input_error("labels JSON missing fields: " + std::string(e.what()));
    }
}

nlohmann::json cluster_result_to_json(const ClusterRunResult& run) {
    std::vector<std::size_t> core_sizes;
    core_sizes.reserve(run.core_sets.size());
    for (const auto& s : run.core_sets) core_sizes.push_back(s.size());
    std::vector<int> empty_flags(run.core_empty.begin(), run.core_empty.end());
    return {{"nu", matrix_to_json(run.nu)},
            {"theta", matrix_to_json(run.theta)},
            {"final_centers", matrix_to_json(run.final_centers)},
            {"z_labels", run.z_labels},
            {"final_labels", run.final_labels},
            {"core_set_sizes", core_sizes},
            {"core_empty", empty_flags},
            {"part3_iterations", run.part3_iterations},
            {"part3_converged", run.part3_converged}};
}

nlohmann::json check_to_json(const InequalityCheck& check) {
    return {{"fact_id", check.fact_id},
            {"lhs", check.lhs},
            {"rhs", check.rhs},
            {"holds", check.holds},
            {"context", check.context}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace sepclust::io
