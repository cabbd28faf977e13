#pragma once

#include <string>
#include <vector>

#include "etsim/numeric.hpp"

namespace etsim::csv {

/// Row-oriented CSV writer with full-precision numeric formatting
/// (17 significant digits), so emitted files are bit-faithful inputs for
/// re-checking invariants.
class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    void row(const std::vector<Real>& values);
    void raw_row(const std::vector<std::string>& cells);

    [[nodiscard]] const std::string& text() const noexcept { return out_; }
    void save(const std::string& path) const;

    [[nodiscard]] static std::string format(Real v);

private:
    std::string out_;
    std::size_t columns_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Strict parser for the files this tool emits; throws on ragged rows.
[[nodiscard]] Table parse(const std::string& text);
[[nodiscard]] Table load(const std::string& path);

}  // namespace etsim::csv
