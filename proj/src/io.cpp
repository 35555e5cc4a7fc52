#include "mghs/io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mghs::io {

namespace fs = std::filesystem;

namespace {

bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(tok, &pos);
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        return pos == tok.size();
    } catch (...) {
        return false;
    }
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first_content_line = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto toks = split_commas(line);
        std::vector<double> row;
        row.reserve(toks.size());
        bool numeric = true;
        for (std::size_t c = 0; c < toks.size(); ++c) {
            double v;
            if (!parse_double(toks[c], v)) {
                if (first_content_line) {
                    numeric = false;  // header line
                    break;
                }
                std::ostringstream os;
                os << path << ": line " << lineno << ", column " << (c + 1)
                   << ": not a number: '" << toks[c] << "'";
                throw std::runtime_error(os.str());
            }
            row.push_back(v);
        }
        if (!numeric) {
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            std::ostringstream os;
            os << path << ": line " << lineno << ": expected "
               << rows.front().size() << " columns, got " << row.size();
            throw std::runtime_error(os.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no numeric rows");
    MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows.front().size(); ++c) m(r, c) = rows[r][c];
    return m;
}

void write_csv_matrix(const std::string& path, const MatrixXd& m,
                      const std::vector<std::string>& header) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << std::setprecision(17);
    if (!header.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i)
            os << (i ? "," : "") << header[i];
        os << "\n";
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXi& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
        os << "\n";
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

MatrixXd standardize_columns(const MatrixXd& m) {
    MatrixXd out = m;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double mean = m.col(c).mean();
        double var = (m.col(c).array() - mean).square().sum() /
                     std::max<double>(1.0, static_cast<double>(m.rows() - 1));
        out.col(c).array() -= mean;
        if (var > 0.0) out.col(c) /= std::sqrt(var);
    }
    return out;
}

std::string file_digest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (is) {
        is.read(buf, sizeof(buf));
        std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void ensure_directory(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path);
}

std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& prefix,
                                    const std::string& suffix) {
    std::vector<std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.size() >= prefix.size() + suffix.size() &&
            name.compare(0, prefix.size(), prefix) == 0 &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace mghs::io
