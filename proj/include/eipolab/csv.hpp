#ifndef EIPOLAB_CSV_HPP_
#define EIPOLAB_CSV_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace eipolab::csv {

// Quotes a field when it holds a comma, quote, CR or LF (RFC 4180).
std::string quote(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; -1 when absent.
  int column(const std::string& name) const;
  bool has(const std::string& name) const { return column(name) >= 0; }
  // Throws UsageError when absent.
  const std::string& at(std::size_t row, const std::string& name) const;
};

// Parses RFC 4180 text with a mandatory header row. Throws UsageError on
// ragged rows or unterminated quotes.
Table parse(const std::string& text);
Table read(const std::filesystem::path& path);

}  // namespace eipolab::csv

#endif  // EIPOLAB_CSV_HPP_
