#include "bioie/corpus/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "bioie/error.hpp"

namespace bioie {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool closes_sentence(std::string_view surface) {
  return surface == "." || surface == "!" || surface == "?";
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, std::span<const std::size_t> sentence_breaks) {
  std::vector<Token> tokens;
  std::size_t sentence = 0;
  bool open_new = false;
  std::size_t next_break = 0;
  std::vector<std::size_t> breaks(sentence_breaks.begin(), sentence_breaks.end());
  std::sort(breaks.begin(), breaks.end());

  auto emit = [&](std::size_t begin, std::size_t end) {
    bool forced = false;
    while (next_break < breaks.size() && breaks[next_break] <= begin) {
      forced = true;
      ++next_break;
    }
    if (!tokens.empty() && (open_new || forced)) ++sentence;
    open_new = false;
    Token t;
    t.surface = std::string(text.substr(begin, end - begin));
    t.char_start = begin;
    t.char_end = end;
    t.index = tokens.size();
    t.sentence = sentence;
    if (closes_sentence(t.surface)) open_new = true;
    tokens.push_back(std::move(t));
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
    } else if (is_punct(text[i])) {
      emit(i, i + 1);
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j]) && !is_punct(text[j])) ++j;
      emit(i, j);
      i = j;
    }
  }
  return tokens;
}

std::pair<std::size_t, std::size_t> token_span(std::span<const Token> tokens, std::size_t text_length,
                                               std::size_t char_start, std::size_t char_end) {
  const std::string where = "[" + std::to_string(char_start) + ", " + std::to_string(char_end) + ")";
  if (char_start >= char_end || char_end > text_length) {
    throw FormatError("mention offsets " + where + " outside text of length " + std::to_string(text_length));
  }
  std::size_t first = tokens.size(), last = 0;
  for (const Token& t : tokens) {
    if (t.pad) continue;
    if (t.char_end > char_start && t.char_start < char_end) {
      first = std::min(first, t.index);
      last = std::max(last, t.index);
    }
  }
  if (first == tokens.size()) throw FormatError("mention offsets " + where + " cover no token");
  return {first, last};
}

}  // namespace bioie
