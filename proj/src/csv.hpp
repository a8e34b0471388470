#pragma once

// Minimal CSV reader used by the dataset parsers. Handles quoted cells,
// CRLF line endings, blank lines and a UTF-8 BOM.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace perfcharter::detail {

struct CsvRow {
    std::size_t line = 0; // 1-based
    std::vector<std::string> cells;
};

std::vector<CsvRow> read_csv(std::string_view text);

std::string trim(std::string_view s);

// Quote a cell only when it needs it.
std::string csv_escape(std::string_view cell);

} // namespace perfcharter::detail
