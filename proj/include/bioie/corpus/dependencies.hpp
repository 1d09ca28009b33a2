#pragma once

#include <filesystem>
#include <istream>

#include "bioie/corpus/document.hpp"

namespace bioie {

// Reads a CoNLL-U style parse (columns ID, HEAD, DEPREL used; comments,
// multiword ranges and empty nodes skipped). Sentences are laid end to end
// over the document tokens; each non-root row becomes an undirected
// (child, head) edge. Throws AlignmentError when token counts differ.
Document attach_dependencies(const Document& doc, std::istream& parse);
Document attach_dependencies(const Document& doc, const std::filesystem::path& parse_file);

// Linear chain (i, i+1) over non-padding tokens, used when no parse exists.
Document attach_linear_chain(const Document& doc);

}  // namespace bioie
