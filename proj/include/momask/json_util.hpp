#pragma once

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/matrix.hpp"

namespace momask {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (size_t r = 0; r < m.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t c = 0; c < m.cols; ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw FormatError("expected array of arrays");
    Matrix m;
    m.rows = j.size();
    m.cols = m.rows > 0 ? j[0].size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != m.cols)
            throw FormatError("ragged matrix in JSON");
        for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
}

} // namespace momask
