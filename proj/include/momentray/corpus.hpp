#pragma once

// The fixed (E, F, I) corpus used by the restricted weak-type and
// refinement experiments.

#include "momentray/sets.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace momentray {

inline constexpr const char* kCorpusVersion = "1";

struct CorpusEntry {
    std::string id;
    int d = 2;
    std::string kind;
    Interval I;
    BoxUnionSet E, F;
};

std::string default_corpus_path();

/// Throws DomainError on a version mismatch or malformed entry.
std::vector<CorpusEntry> parse_corpus(const nlohmann::json& j);
std::vector<CorpusEntry> load_corpus(const std::string& path = default_corpus_path());

/// [{"lo": [...], "hi": [...]}, ...]
BoxUnionSet box_union_from_json(const nlohmann::json& j, int dim);
nlohmann::json box_union_to_json(const BoxUnionSet& S);
Interval interval_from_json(const nlohmann::json& j);

}  // namespace momentray
