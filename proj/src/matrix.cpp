#include "sepclust/matrix.hpp"

#include "sepclust/errors.hpp"

#include <algorithm>

namespace sepclust {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> tmp;
    tmp.reserve(rows.size());
    for (const auto& r : rows) tmp.emplace_back(r);
    return from_rows(tmp);
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t d = rows.front().size();
    Matrix m(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw input_error("from_rows: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::set_row(std::size_t i, std::span<const double> values) {
    if (values.size() != cols_) throw input_error("set_row: size mismatch");
    std::copy(values.begin(), values.end(), row(i).begin());
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

} // namespace sepclust
