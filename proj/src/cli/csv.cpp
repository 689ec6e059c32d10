#include "msim/cli/csv.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "msim/cli/config.hpp"
#include "msim/errors.hpp"

namespace msim::cli {

void CsvDocument::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgument("CSV row has " + std::to_string(row.size()) + " values for " +
                          std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const CsvDocument& doc) {
  for (const auto& line : doc.header) out << "# " << line << '\n';
  for (std::size_t i = 0; i < doc.columns.size(); ++i) out << (i ? "," : "") << doc.columns[i];
  out << '\n';
  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  for (const auto& line : doc.footer) out << "# " << line << '\n';
}

std::string to_csv(const CsvDocument& doc) {
  std::ostringstream ss;
  write_csv(ss, doc);
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw InvalidArgument("failed writing to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw InvalidArgument("failed writing '" + path + "'");
}

}  // namespace msim::cli
