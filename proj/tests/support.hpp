#pragma once

#include "reachck/parse.hpp"
#include "reachck/qualifier.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline std::string corpusDir() { return REACHCK_CORPUS_DIR; }
inline std::string goldenDir() { return REACHCK_GOLDEN_DIR; }

inline std::string readText(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline reachck::TermP loadCorpus(const std::string& file) {
    return reachck::parseProgram(readText(corpusDir() + "/" + file));
}

// Expected verdict per corpus file: empty kind means the program is accepted.
struct CorpusCase {
    std::string file;
    std::string kind;
};

inline const std::vector<CorpusCase>& corpusCases() {
    static const std::vector<CorpusCase> cases = {
        {"alias_ok.rt", ""},
        {"cell_singleton_err.rt", "ReferentMismatch"},
        {"cell_union_ok.rt", ""},
        {"cyclic_not_singleton_err.rt", "CyclicQualifierNotSingleton"},
        {"escape_nested_ok.rt", ""},
        {"factorial.rt", ""},
        {"immutable_ok.rt", ""},
        {"immutable_write_err.rt", "WriteForbidden"},
        {"landin_noncyclic_err.rt", "ReferentMismatch"},
        {"landin_ok.rt", ""},
        {"loop.rt", ""},
        {"mkref_deep_contrast.rt", ""},
        {"mkref_escape_ok.rt", ""},
        {"newctx_ok.rt", ""},
        {"par_deep_contrast.rt", ""},
        {"par_ok.rt", ""},
        {"readonly_ok.rt", ""},
        {"readonly_write_err.rt", "ReferentMismatch"},
        {"separation_update_err.rt", "SeparationViolation"},
    };
    return cases;
}

inline std::vector<std::string> corpusFiles() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(corpusDir()))
        if (e.path().extension() == ".rt") out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

// Reference closure: explicit graph search over the last binding of each key,
// following only edges between atoms of the key's sort.
inline reachck::Qual closureOracle(const reachck::ReachEnv& env, const reachck::Qual& q) {
    std::map<reachck::Atom, reachck::Qual> edges;
    for (const auto& [k, d] : env.entries) edges[k] = d;
    reachck::Qual seen;
    std::vector<reachck::Atom> stack(q.begin(), q.end());
    while (!stack.empty()) {
        reachck::Atom a = stack.back();
        stack.pop_back();
        if (!seen.insert(a).second) continue;
        auto it = edges.find(a);
        if (it == edges.end()) continue;
        for (const auto& b : it->second)
            if (b.kind == a.kind) stack.push_back(b);
    }
    return seen;
}

}  // namespace testing
