#include <qjo/catalog.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>


using namespace qjo;
using json = nlohmann::json;


namespace {

bool is_identifier(std::string_view s)
{
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'a' and c <= 'z') or (c >= 'A' and c <= 'Z') or c == '_'; };
    auto tail = [&](char c) { return head(c) or (c >= '0' and c <= '9'); };
    if (not head(s.front())) return false;
    return std::all_of(s.begin() + 1, s.end(), tail);
}

const json & require(const json &obj, const char *key, const std::string &where)
{
    if (not obj.is_object()) throw ParseError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

std::string require_string(const json &obj, const char *key, const std::string &where)
{
    const json &v = require(obj, key, where);
    if (not v.is_string()) throw ParseError(where + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

double require_number(const json &obj, const char *key, const std::string &where)
{
    const json &v = require(obj, key, where);
    if (not v.is_number()) throw ParseError(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

const json & require_array(const json &obj, const char *key, const std::string &where)
{
    const json &v = require(obj, key, where);
    if (not v.is_array()) throw ParseError(where + ": '" + key + "' must be an array");
    return v;
}

}


/*======================================================================================================================
 * Catalog
 *====================================================================================================================*/

Catalog::Catalog(std::vector<Relation> relations, std::vector<Predicate> predicates)
    : relations_(std::move(relations))
    , predicates_(std::move(predicates))
{
    for (std::size_t i = 0; i != relations_.size(); ++i) {
        const Relation &r = relations_[i];
        if (not is_identifier(r.name))
            throw ValidationError("relation name '" + r.name + "' is not an identifier");
        if (not std::isfinite(r.cardinality) or r.cardinality < 1.0)
            throw ValidationError("relation '" + r.name + "' must have cardinality >= 1");
        if (not index_.emplace(r.name, i).second)
            throw ValidationError("duplicate relation name '" + r.name + "'");
    }
    for (std::size_t i = 0; i != predicates_.size(); ++i) {
        const Predicate &p = predicates_[i];
        const std::string where = "predicate " + std::to_string(i);
        if (not find(p.left)) throw ValidationError(where + ": unknown relation '" + p.left + "'");
        if (not find(p.right)) throw ValidationError(where + ": unknown relation '" + p.right + "'");
        if (p.left == p.right) throw ValidationError(where + ": relations must be distinct");
        if (not (p.selectivity > 0.0 and p.selectivity <= 1.0))
            throw ValidationError(where + ": selectivity must lie in (0, 1]");
    }
}

std::optional<std::size_t> Catalog::find(std::string_view name) const
{
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const Relation & Catalog::relation(std::string_view name) const
{
    auto idx = find(name);
    if (not idx) throw ValidationError("unknown relation '" + std::string(name) + "'");
    return relations_[*idx];
}

const QuerySpec & Workload::query(std::string_view id) const
{
    for (const auto &q : queries)
        if (q.id == id) return q;
    throw ValidationError("unknown query '" + std::string(id) + "'");
}


/*======================================================================================================================
 * Validation and I/O
 *====================================================================================================================*/

void qjo::validate_query(const Catalog &catalog, const QuerySpec &query)
{
    const std::string where = "query '" + query.id + "'";
    if (query.relations.size() < 2) throw ValidationError(where + ": needs at least two relations");
    if (query.relations.size() > kMaxQueryRelations)
        throw ValidationError(where + ": more than " + std::to_string(kMaxQueryRelations) + " relations");

    std::set<std::string> seen;
    for (const auto &name : query.relations) {
        if (not catalog.find(name)) throw ValidationError(where + ": unknown relation '" + name + "'");
        if (not seen.insert(name).second) throw ValidationError(where + ": relation '" + name + "' listed twice");
    }
    std::set<std::size_t> seen_predicates;
    for (std::size_t p : query.predicates) {
        if (p >= catalog.predicates().size())
            throw ValidationError(where + ": predicate index " + std::to_string(p) + " out of range");
        if (not seen_predicates.insert(p).second)
            throw ValidationError(where + ": predicate index " + std::to_string(p) + " listed twice");
        const Predicate &pred = catalog.predicates()[p];
        if (not seen.contains(pred.left) or not seen.contains(pred.right))
            throw ValidationError(where + ": predicate " + std::to_string(p) + " is not internal to the query");
    }

    CostModel model(catalog, query);
    if (not model.connected(model.all()))
        throw ValidationError(where + ": join graph is disconnected (cross products are not supported)");
}

Workload qjo::load_workload(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("workload is not valid JSON: ") + e.what());
    }
    if (not doc.is_object()) throw ParseError("workload: top level must be an object");

    std::vector<Relation> relations;
    for (const json &r : require_array(doc, "relations", "workload")) {
        const std::string where = "relation " + std::to_string(relations.size());
        relations.push_back({require_string(r, "name", where), require_number(r, "cardinality", where)});
    }
    std::vector<Predicate> predicates;
    for (const json &p : require_array(doc, "predicates", "workload")) {
        const std::string where = "predicate " + std::to_string(predicates.size());
        predicates.push_back({require_string(p, "left", where), require_string(p, "right", where),
                              require_number(p, "selectivity", where)});
    }

    Workload w{Catalog(std::move(relations), std::move(predicates)), {}};

    std::set<std::string> ids;
    for (const json &q : require_array(doc, "queries", "workload")) {
        const std::string where = "query " + std::to_string(w.queries.size());
        QuerySpec spec;
        spec.id = require_string(q, "id", where);
        for (const json &name : require_array(q, "relations", where)) {
            if (not name.is_string()) throw ParseError(where + ": relation entries must be strings");
            spec.relations.push_back(name.get<std::string>());
        }
        for (const json &idx : require_array(q, "predicates", where)) {
            if (not idx.is_number_unsigned()) throw ParseError(where + ": predicate entries must be indices");
            spec.predicates.push_back(idx.get<std::size_t>());
        }
        if (not ids.insert(spec.id).second) throw ValidationError("duplicate query id '" + spec.id + "'");
        validate_query(w.catalog, spec);
        w.queries.push_back(std::move(spec));
    }
    return w;
}

Workload qjo::load_workload_file(const std::string &path)
{
    std::ifstream in(path);
    if (not in) throw ParseError("cannot open workload file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_workload(buf.str());
}

std::string qjo::serialize_workload(const Workload &workload)
{
    nlohmann::ordered_json doc;
    doc["relations"] = nlohmann::ordered_json::array();
    for (const auto &r : workload.catalog.relations()) {
        nlohmann::ordered_json item;
        item["name"] = r.name;
        item["cardinality"] = r.cardinality;
        doc["relations"].push_back(std::move(item));
    }
    doc["predicates"] = nlohmann::ordered_json::array();
    for (const auto &p : workload.catalog.predicates()) {
        nlohmann::ordered_json item;
        item["left"] = p.left;
        item["right"] = p.right;
        item["selectivity"] = p.selectivity;
        doc["predicates"].push_back(std::move(item));
    }
    doc["queries"] = nlohmann::ordered_json::array();
    for (const auto &q : workload.queries) {
        nlohmann::ordered_json item;
        item["id"] = q.id;
        item["relations"] = q.relations;
        item["predicates"] = q.predicates;
        doc["queries"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}


/*======================================================================================================================
 * CostModel
 *====================================================================================================================*/

CostModel::CostModel(const Catalog &catalog, const QuerySpec &query)
    : names_(query.relations)
{
    if (names_.size() > kMaxQueryRelations)
        throw ValidationError("query '" + query.id + "' has too many relations");
    cardinalities_.reserve(names_.size());
    for (const auto &name : names_) cardinalities_.push_back(catalog.relation(name).cardinality);
    adjacency_.assign(names_.size(), 0);
    for (std::size_t p : query.predicates) {
        if (p >= catalog.predicates().size())
            throw ValidationError("query '" + query.id + "': predicate index out of range");
        const Predicate &pred = catalog.predicates()[p];
        std::size_t l = index_of(pred.left);
        std::size_t r = index_of(pred.right);
        predicates_.push_back({l, r, pred.selectivity, p});
        adjacency_[l] |= RelSet(1) << r;
        adjacency_[r] |= RelSet(1) << l;
    }
}

std::size_t CostModel::index_of(std::string_view name) const
{
    for (std::size_t i = 0; i != names_.size(); ++i)
        if (names_[i] == name) return i;
    throw std::invalid_argument("relation '" + std::string(name) + "' is not part of the query");
}

RelSet CostModel::all() const
{
    return names_.size() == 64 ? ~RelSet(0) : (RelSet(1) << names_.size()) - 1;
}

bool CostModel::connected(RelSet subset) const
{
    if (subset == 0) return false;
    RelSet reached = subset & (~subset + 1); // lowest bit
    RelSet frontier = reached;
    while (frontier) {
        RelSet next = 0;
        for (RelSet f = frontier; f; f &= f - 1)
            next |= adjacency_[std::countr_zero(f)];
        next &= subset & ~reached;
        reached |= next;
        frontier = next;
    }
    return reached == subset;
}

double CostModel::estimate_unchecked(RelSet subset) const
{
    double card = 1.0;
    for (RelSet s = subset; s; s &= s - 1)
        card *= cardinalities_[std::countr_zero(s)];
    for (const auto &p : predicates_) {
        if ((subset >> p.left & 1) and (subset >> p.right & 1))
            card *= p.selectivity;
    }
    return std::max(1.0, card);
}

double CostModel::estimate(RelSet subset) const
{
    if (subset == 0 or (subset & ~all()))
        throw std::invalid_argument("relation subset is empty or not part of the query");
    if (not connected(subset))
        throw std::invalid_argument("relation subset is not connected under the query predicates");
    return estimate_unchecked(subset);
}

RelSet CostModel::relations_of(const PlanTree &plan) const
{
    if (plan.is_leaf()) return RelSet(1) << index_of(plan.relation());
    RelSet l = relations_of(plan.left());
    RelSet r = relations_of(plan.right());
    if (l & r) throw std::invalid_argument("plan mentions a relation twice");
    return l | r;
}

double CostModel::cost(const PlanTree &plan) const
{
    if (relations_of(plan) != all())
        throw std::invalid_argument("plan does not cover exactly the query's relations");
    auto walk = [this](auto &&self, const PlanTree &node) -> std::pair<RelSet, double> {
        if (node.is_leaf()) return {RelSet(1) << index_of(node.relation()), 0.0};
        auto [ls, lc] = self(self, node.left());
        auto [rs, rc] = self(self, node.right());
        RelSet s = ls | rs;
        return {s, lc + rc + estimate(s)};
    };
    return walk(walk, plan).second;
}

double qjo::estimate_cardinality(const Catalog &catalog, const QuerySpec &query,
                                 const std::vector<std::string> &subset)
{
    CostModel model(catalog, query);
    RelSet s = 0;
    for (const auto &name : subset) s |= RelSet(1) << model.index_of(name);
    return model.estimate(s);
}

double qjo::plan_cost(const Catalog &catalog, const QuerySpec &query, const PlanTree &plan)
{
    return CostModel(catalog, query).cost(plan);
}
