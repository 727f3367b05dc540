#include "unfold/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace unfold::io {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out.imbue(std::locale::classic());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (s.empty() || end != begin + s.size() || !std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(line) + ": '" + s + "' is not a finite number");
    }
    return v;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    Csv csv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (csv.header.empty()) {
            csv.header = std::move(cells);
            continue;
        }
        if (cells.size() != csv.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(csv.header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        csv.rows.push_back(std::move(cells));
    }
    if (csv.header.empty()) throw DataError("'" + path.string() + "' is empty");
    return csv;
}

}  // namespace

void write_points_csv(const std::filesystem::path& path, const Matrix& points, const std::vector<std::string>* labels) {
    if (labels && static_cast<Index>(labels->size()) != points.cols()) {
        throw InvalidArgument("label count does not match the point count");
    }
    auto out = open_out(path);
    for (Index i = 0; i < points.rows(); ++i) out << (i ? "," : "") << 'x' << i;
    if (labels) out << ",label";
    out << '\n';
    for (Index j = 0; j < points.cols(); ++j) {
        for (Index i = 0; i < points.rows(); ++i) out << (i ? "," : "") << format_double(points(i, j));
        if (labels) {
            const auto& l = (*labels)[static_cast<std::size_t>(j)];
            if (l.find_first_of(",\n\r") != std::string::npos) throw InvalidArgument("labels may not contain commas or newlines");
            out << ',' << l;
        }
        out << '\n';
    }
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Dataset read_points_csv(const std::filesystem::path& path) {
    const Csv csv = read_csv(path);
    const bool labelled = csv.header.back() == "label";
    const std::size_t d = csv.header.size() - (labelled ? 1 : 0);
    if (d == 0) throw DataError("'" + path.string() + "' has no coordinate columns");
    if (csv.rows.empty()) throw DataError("'" + path.string() + "' has no points");
    Matrix pts(static_cast<Index>(d), static_cast<Index>(csv.rows.size()));
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            pts(static_cast<Index>(c), static_cast<Index>(r)) = parse_double(csv.rows[r][c], path, r + 2);
        }
        if (labelled) labels.push_back(csv.rows[r].back());
    }
    Dataset data(std::move(pts), labelled ? std::optional(std::move(labels)) : std::nullopt);
    data.validate();
    return data;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::string& prefix) {
    std::vector<std::string> header;
    for (Index c = 0; c < m.cols(); ++c) header.push_back(prefix + std::to_string(c));
    write_matrix_csv(path, m, header);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
    if (static_cast<Index>(header.size()) != m.cols()) throw InvalidArgument("CSV header width does not match the matrix");
    auto out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
        out << '\n';
    }
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    const Csv csv = read_csv(path);
    Matrix m(static_cast<Index>(csv.rows.size()), static_cast<Index>(csv.header.size()));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        for (std::size_t c = 0; c < csv.header.size(); ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = parse_double(csv.rows[r][c], path, r + 2);
        }
    }
    return m;
}

std::vector<std::string> read_actions(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string a = trim(line);
        if (lineno == 1 && a == "action") continue;
        if (a.empty()) {
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": empty action");
        }
        out.push_back(a);
    }
    return out;
}

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw DataError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw DataError(where + ": empty key");
        if (!out.emplace(key, trim(line.substr(eq + 1))).second) throw DataError(where + ": duplicate key '" + key + "'");
    }
    return out;
}

std::string digest(const Matrix& m) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
    mix(shape, sizeof shape);
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) {
            const double v = m(i, j) == 0.0 ? 0.0 : m(i, j);  // fold -0
            mix(&v, sizeof v);
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw DataError("matrix must be a JSON array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows ? static_cast<Index>(j.front().size()) : 0;
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw DataError("ragged matrix in JSON");
        for (Index c = 0; c < cols; ++c) {
            const Json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw DataError("matrix entries must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

Json to_json(const oos::EigenModel& model) {
    Json j;
    j["scheme"] = "eigen";
    j["training_digest"] = digest(model.training);
    j["bandwidth"] = model.bandwidth;
    j["eta"] = model.eta;
    j["training"] = matrix_to_json(model.training);
    j["p"] = matrix_to_json(model.p);
    return j;
}

Json to_json(const oos::KernelMap& model) {
    Json j;
    j["scheme"] = "kernel-map";
    j["training_digest"] = digest(model.training);
    j["gamma"] = model.gamma;
    j["training"] = matrix_to_json(model.training);
    j["sigma"] = matrix_to_json(Matrix(model.sigma.transpose()));
    j["a"] = matrix_to_json(model.a);
    return j;
}

SavedModel model_from_json(const Json& j) {
    SavedModel out;
    try {
        out.scheme = j.at("scheme").get<std::string>();
        const Matrix training = matrix_from_json(j.at("training"));
        if (digest(training) != j.at("training_digest").get<std::string>()) {
            throw DataError("model training digest does not match its training points");
        }
        if (out.scheme == "eigen") {
            out.eigen.training = training;
            out.eigen.bandwidth = j.at("bandwidth").get<double>();
            out.eigen.eta = j.at("eta").get<double>();
            out.eigen.p = matrix_from_json(j.at("p"));
            if (out.eigen.p.cols() != training.cols()) throw DataError("eigen model shape mismatch");
        } else if (out.scheme == "kernel-map") {
            out.kernel_map.training = training;
            out.kernel_map.gamma = j.at("gamma").get<double>();
            const Matrix sigma = matrix_from_json(j.at("sigma"));
            if (sigma.rows() != 1 || sigma.cols() != training.cols()) throw DataError("kernel-map sigma shape mismatch");
            out.kernel_map.sigma = sigma.row(0).transpose();
            out.kernel_map.a = matrix_from_json(j.at("a"));
            if (out.kernel_map.a.rows() != training.cols()) throw DataError("kernel-map coefficient shape mismatch");
        } else {
            throw DataError("unknown model scheme '" + out.scheme + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
    return out;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Json read_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace unfold::io
