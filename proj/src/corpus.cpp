#include "momentray/corpus.hpp"

#include <fstream>

namespace momentray {

std::string default_corpus_path() { return std::string(MOMENTRAY_SOURCE_DIR) + "/corpus/rwt_corpus.json"; }

namespace {

Eigen::VectorXd vec(const nlohmann::json& j, int dim, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw DomainError(std::string(what) + ": expected an array of " + std::to_string(dim) + " numbers");
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = j[i].get<double>();
    return v;
}

}  // namespace

Interval interval_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw DomainError("interval: expected [lo, hi]");
    return Interval(j[0].get<double>(), j[1].get<double>());
}

BoxUnionSet box_union_from_json(const nlohmann::json& j, int dim) {
    if (!j.is_array() || j.empty()) throw DomainError("box list: expected a non-empty array");
    std::vector<Box> boxes;
    for (const auto& b : j) {
        if (!b.contains("lo") || !b.contains("hi")) throw DomainError("box: missing lo/hi");
        boxes.emplace_back(vec(b["lo"], dim, "box.lo"), vec(b["hi"], dim, "box.hi"));
    }
    return BoxUnionSet::make(dim, std::move(boxes));
}

nlohmann::json box_union_to_json(const BoxUnionSet& S) {
    nlohmann::json out = nlohmann::json::array();
    for (const Box& b : S.boxes()) {
        std::vector<double> lo(b.lo.data(), b.lo.data() + b.dim());
        std::vector<double> hi(b.hi.data(), b.hi.data() + b.dim());
        out.push_back({{"lo", lo}, {"hi", hi}});
    }
    return out;
}

std::vector<CorpusEntry> parse_corpus(const nlohmann::json& j) {
    if (!j.contains("version") || j["version"] != kCorpusVersion)
        throw DomainError(std::string("corpus: expected version ") + kCorpusVersion);
    std::vector<CorpusEntry> out;
    for (const auto& e : j.at("entries")) {
        CorpusEntry c;
        c.id = e.at("id").get<std::string>();
        try {
            c.d = e.at("d").get<int>();
            Dim(c.d);
            c.kind = e.value("kind", "");
            c.I = interval_from_json(e.at("I"));
            c.E = box_union_from_json(e.at("E"), c.d);
            c.F = box_union_from_json(e.at("F"), c.d);
        } catch (const nlohmann::json::exception& ex) {
            throw DomainError("corpus entry " + c.id + ": " + ex.what());
        } catch (const DomainError& ex) {
            throw DomainError("corpus entry " + c.id + ": " + ex.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<CorpusEntry> load_corpus(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot open corpus " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& ex) {
        throw DomainError("corpus " + path + ": " + ex.what());
    }
    return parse_corpus(j);
}

}  // namespace momentray
