#include "bioie/corpus/dependencies.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bioie/error.hpp"

namespace bioie {

Document attach_dependencies(const Document& doc, std::istream& parse) {
  struct Row {
    std::size_t sentence_offset;
    std::size_t head;  // 1-based within the sentence, 0 for root
    std::string label;
  };
  std::vector<Row> rows;
  std::size_t sentence_offset = 0, sentence_size = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(parse, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      sentence_offset += sentence_size;
      sentence_size = 0;
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 8) throw FormatError("CoNLL-U row needs at least 8 columns", line_no);
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    if (cols[6].empty() || cols[6].find_first_not_of("0123456789") != std::string::npos) {
      throw FormatError("HEAD column is not a number: '" + cols[6] + "'", line_no);
    }
    rows.push_back({sentence_offset, std::stoul(cols[6]), cols[7]});
    ++sentence_size;
  }

  const std::size_t tokens = doc.content_length();
  if (rows.size() != tokens) {
    throw AlignmentError("parse for " + doc.id + " has " + std::to_string(rows.size()) +
                         " tokens but the document has " + std::to_string(tokens));
  }
  Document out = doc;
  out.dep_edges.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].head == 0) continue;
    const std::size_t head = rows[i].sentence_offset + rows[i].head - 1;
    if (head >= tokens || head == i) {
      throw AlignmentError("parse for " + doc.id + " has an invalid head at token " + std::to_string(i));
    }
    out.dep_edges.push_back({i, head, rows[i].label});
  }
  return out;
}

Document attach_dependencies(const Document& doc, const std::filesystem::path& parse_file) {
  std::ifstream in(parse_file);
  if (!in) throw Error("cannot open " + parse_file.string());
  return attach_dependencies(doc, in);
}

Document attach_linear_chain(const Document& doc) {
  Document out = doc;
  out.dep_edges.clear();
  const std::size_t n = doc.content_length();
  for (std::size_t i = 0; i + 1 < n; ++i) out.dep_edges.push_back({i, i + 1, "next"});
  return out;
}

}  // namespace bioie
