#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "bioie/corpus/document.hpp"

namespace bioie {

// PubTator layout: `id|t|title`, `id|a|abstract`, tab-separated mention lines
// `id start end text type norm_id`, relation lines `id CID chem_id disease_id`,
// blank-line separated. Document text is title + " " + abstract.
Dataset parse_pubtator(std::istream& in);
Dataset parse_pubtator(const std::filesystem::path& path);

// ChemProt abstracts (`pmid title abstract`), entities (`pmid T# TYPE start
// end text`) and relations (gold-standard four-column or full six-column).
// Instances are in-sentence chemical/gene pairs only.
Dataset parse_chemprot(std::istream& abstracts, std::istream& entities, std::istream& relations);
Dataset parse_chemprot(const std::filesystem::path& abstracts, const std::filesystem::path& entities,
                       const std::filesystem::path& relations);

// Canonical pathology record file, one JSON object per line with fields
// id, source, text, mentions [{kind, char_start, char_end}] and
// relations [{head, tail, kind}] (head/tail are mention indices).
Dataset parse_pathology_records(std::istream& in);
Dataset parse_pathology_records(const std::filesystem::path& path);

// Inverse of the record parser for one document.
std::string serialize_record(const Document& doc);

}  // namespace bioie
