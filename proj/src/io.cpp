#include "lpm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpm/error.hpp"

namespace lpm::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

void write_csv(const std::filesystem::path& path, const RowMatrix& data, const std::vector<std::string>& header) {
    std::string text;
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) text += (j ? "," : "") + header[j];
        text += '\n';
    }
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            if (j) text += ',';
            text += format_double(data(i, j));
        }
        text += '\n';
    }
    write_text(path, text);
}

RowMatrix read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            fail(ErrorCode::config, "non-numeric CSV row in " + path.string() + ": " + line);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorCode::config, "ragged CSV row in " + path.string());
        rows.push_back(std::move(row));
    }
    const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), j) = rows[i][j];
    return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::config, "invalid JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace lpm::io
