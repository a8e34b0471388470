#include "csv.hpp"

#include "perfcharter/error.hpp"

namespace perfcharter::detail {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<CsvRow> read_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<CsvRow> rows;
    CsvRow current;
    std::string cell;
    bool in_quotes = false;
    bool cell_was_quoted = false;
    std::size_t line = 1;
    current.line = line;

    auto finish_cell = [&] {
        current.cells.push_back(cell_was_quoted ? cell : trim(cell));
        cell.clear();
        cell_was_quoted = false;
    };
    auto finish_row = [&] {
        finish_cell();
        const bool blank = current.cells.size() == 1 && current.cells[0].empty();
        if (!blank) rows.push_back(std::move(current));
        current = CsvRow{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                cell.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (!trim(cell).empty())
                throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": stray quote");
            cell.clear();
            in_quotes = true;
            cell_was_quoted = true;
            break;
        case ',':
            finish_cell();
            break;
        case '\r':
            break;
        case '\n':
            ++line;
            finish_row();
            break;
        default:
            cell.push_back(ch);
        }
    }
    if (in_quotes)
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": unterminated quote");
    finish_row();
    return rows;
}

std::string csv_escape(std::string_view cell) {
    if (cell.find_first_of(",\"\n\r") == std::string_view::npos && trim(cell) == cell)
        return std::string(cell);
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

} // namespace perfcharter::detail
