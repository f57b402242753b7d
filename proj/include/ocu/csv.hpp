#ifndef OCU_CSV_HPP
#define OCU_CSV_HPP

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ocu {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal, capped at 17 significant digits; '.' decimal
/// separator regardless of locale.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// CSV with a header row, LF line endings, deterministic formatting.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw IoError("CsvWriter: cell count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    const std::string& str() const { return body_; }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("CsvWriter: cannot open " + path);
        f << body_;
        if (!f) throw IoError("CsvWriter: write failed for " + path);
    }

  private:
    std::size_t columns_;
    std::string body_;
};

}  // namespace ocu

#endif
