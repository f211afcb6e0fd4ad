#pragma once

// CSV layout: a header row, feature columns f0..f{d-1} (any order), and an
// optional integer `label` column. Comma separated, '.' decimal point.

#include <ckb/error.hpp>
#include <ckb/types.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ckb {

struct CsvSchema {
    /// Label range [0, K). Inferred as max label + 1 when empty.
    std::optional<int> num_classes;
    bool labels_required = false;
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
            cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t'))
            cell.remove_suffix(1);
        out.push_back(cell);
        if (comma == std::string_view::npos)
            return out;
        start = comma + 1;
    }
}

inline std::string csv_error(std::size_t line, const std::string& msg) {
    return "csv line " + std::to_string(line) + ": " + msg;
}

} // namespace detail

inline LabeledDataset read_csv(std::istream& in, const CsvSchema& schema = {}, std::string name = "csv") {
    std::string line;
    std::size_t line_no = 0;
    const auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
                line.erase(0, 3);
            if (line.find_first_not_of(" \t") != std::string::npos)
                return true;
        }
        return false;
    };

    if (!next_line())
        throw InputError("csv: missing header row");
    const auto header = detail::split_commas(line);
    std::vector<int> feature_of_column(header.size(), -1);
    std::optional<std::size_t> label_column;
    int dim = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string_view h = header[c];
        if (h == "label") {
            if (label_column)
                throw InputError(detail::csv_error(line_no, "duplicate label column"));
            label_column = c;
            continue;
        }
        int index = -1;
        if (h.size() >= 2 && h[0] == 'f') {
            const auto [ptr, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), index);
            if (ec != std::errc() || ptr != h.data() + h.size())
                index = -1;
        }
        if (index < 0)
            throw InputError(detail::csv_error(line_no, "unexpected column '" + std::string(h) + "'"));
        feature_of_column[c] = index;
        dim = std::max(dim, index + 1);
    }
    {
        std::vector<int> seen(static_cast<std::size_t>(dim), 0);
        for (int f : feature_of_column)
            if (f >= 0)
                ++seen[static_cast<std::size_t>(f)];
        for (int f = 0; f < dim; ++f)
            if (seen[static_cast<std::size_t>(f)] != 1)
                throw InputError(detail::csv_error(line_no, "feature columns must be f0..f" +
                                                                std::to_string(dim - 1) + " exactly once"));
    }
    if (dim == 0)
        throw InputError(detail::csv_error(line_no, "no feature columns"));
    if (schema.labels_required && !label_column)
        throw InputError("csv: label column required");

    std::vector<double> values;
    std::vector<int> labels;
    while (next_line()) {
        const auto cells = detail::split_commas(line);
        if (cells.size() != header.size())
            throw InputError(detail::csv_error(line_no, "expected " + std::to_string(header.size()) +
                                                            " fields, found " + std::to_string(cells.size())));
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string_view cell = cells[c];
            if (label_column && c == *label_column) {
                int label = 0;
                const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
                if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
                    throw InputError(detail::csv_error(line_no, "bad label '" + std::string(cell) + "'"));
                labels.push_back(label);
                continue;
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
                throw InputError(detail::csv_error(line_no, "bad number '" + std::string(cell) + "'"));
            row[static_cast<std::size_t>(feature_of_column[c])] = v;
        }
        values.insert(values.end(), row.begin(), row.end());
    }

    LabeledDataset D;
    D.name = std::move(name);
    const Index p = static_cast<Index>(values.size()) / dim;
    if (p == 0)
        throw InputError("csv: no data rows");
    D.X = Eigen::Map<const Matrix>(values.data(), dim, p);
    if (label_column) {
        int K = schema.num_classes.value_or(0);
        if (!schema.num_classes)
            for (int l : labels)
                K = std::max(K, l + 1);
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (labels[j] < 0 || labels[j] >= K)
                throw InputError("csv: label " + std::to_string(labels[j]) + " on data row " +
                                 std::to_string(j + 1) + " outside [0, " + std::to_string(K) + ")");
        D.Y = one_hot(labels, K);
    }
    return D;
}

inline LabeledDataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    return read_csv(in, schema, path);
}

/// Writes features with shortest round-trip formatting. Labels must be one-hot.
inline void write_csv(std::ostream& out, const LabeledDataset& D) {
    std::vector<int> labels;
    if (D.Y) {
        labels = argmax_labels(*D.Y);
        for (Index j = 0; j < D.size(); ++j)
            if (D.Y->col(j).sum() != 1.0 || (*D.Y)(labels[static_cast<std::size_t>(j)], j) != 1.0)
                throw InputError("write_csv: labels must be one-hot");
    }
    for (Index i = 0; i < D.dim(); ++i)
        out << (i ? "," : "") << 'f' << i;
    if (D.Y)
        out << ",label";
    out << '\n';
    char buf[64];
    for (Index j = 0; j < D.size(); ++j) {
        for (Index i = 0; i < D.dim(); ++i) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), D.X(i, j));
            out << (i ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        if (D.Y)
            out << ',' << labels[static_cast<std::size_t>(j)];
        out << '\n';
    }
}

inline void save_csv(const std::string& path, const LabeledDataset& D) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    write_csv(out, D);
}

} // namespace ckb
