#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bioie/corpus/document.hpp"

namespace bioie {

// Whitespace tokenizer that also splits every ASCII punctuation character into
// its own token. Offsets index into `text`. A token ".", "!" or "?" closes a
// sentence, as does any offset in `sentence_breaks` (a token starting at or
// after the offset opens a new sentence).
std::vector<Token> tokenize(std::string_view text, std::span<const std::size_t> sentence_breaks = {});

// Inclusive token range overlapping the character span [char_start, char_end).
// Throws FormatError when the span is empty, runs past the text, or covers no
// token.
std::pair<std::size_t, std::size_t> token_span(std::span<const Token> tokens, std::size_t text_length,
                                               std::size_t char_start, std::size_t char_end);

}  // namespace bioie
