#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mlm/error.hpp"
#include "mlm/hierarchy.hpp"

namespace mlm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::pair<int, int> line_column(const std::string& text, std::size_t offset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const json& field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorKind::SchemaError, where + ": missing \"" + key + "\"");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) throw Error(ErrorKind::SchemaError, where + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorKind::SchemaError, where + ": \"" + key + "\" must be a string");
    return it->get<std::string>();
}

std::vector<std::string> split_dots(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto dot = s.find('.', start);
        parts.push_back(s.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return parts;
}

struct PendingArrowType {
    std::string model;
    Arrow arrow;
    std::string type;
};

} // namespace

Hierarchy parse_hierarchy(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw Error(ErrorKind::ParseError,
                    "invalid JSON at line " + std::to_string(line) + ", column " + std::to_string(col), line, col);
    }
    if (!doc.is_object()) throw Error(ErrorKind::SchemaError, "top level must be an object");
    const json& jmodels = field(doc, "models", "hierarchy");
    if (!jmodels.is_array()) throw Error(ErrorKind::SchemaError, "\"models\" must be an array");

    std::vector<Model> models;
    std::map<std::string, int> stated_levels;
    std::vector<PendingArrowType> pending;
    for (const auto& jm : jmodels) {
        if (!jm.is_object()) throw Error(ErrorKind::SchemaError, "each model must be an object");
        Model m;
        m.name = string_field(jm, "name", "model");
        const std::string where = "model '" + m.name + "'";
        m.parent = optional_string(jm, "parent", where);
        if (auto lv = jm.find("level"); lv != jm.end()) {
            if (!lv->is_number_unsigned()) throw Error(ErrorKind::SchemaError, where + ": \"level\" must be a natural");
            stated_levels[m.name] = lv->get<int>();
        }
        m.graph = Graph(m.name);
        try {
            for (const auto& jn : jm.value("nodes", json::array())) {
                std::string n = string_field(jn, "name", where + " node");
                m.graph.add_node(n);
                ElementInfo info;
                if (auto t = optional_string(jn, "type", where + " node '" + n + "'")) {
                    auto parts = split_dots(*t);
                    if (parts.size() != 2)
                        throw Error(ErrorKind::SchemaError, where + ": node type '" + *t + "' must be Model.Element");
                    info.type = TypeRef{parts[0], parts[1]};
                }
                if (auto p = optional_string(jn, "potency", where)) info.potency = parse_potency(*p);
                if (auto s = jn.find("supertypes"); s != jn.end()) {
                    if (!s->is_array()) throw Error(ErrorKind::SchemaError, where + ": \"supertypes\" must be an array");
                    for (const auto& st : *s) {
                        if (!st.is_string()) throw Error(ErrorKind::SchemaError, where + ": supertypes are node names");
                        info.supertypes.push_back(st.get<std::string>());
                    }
                }
                m.info[Element{n}] = info;
            }
            for (const auto& ja : jm.value("arrows", json::array())) {
                Arrow a{string_field(ja, "source", where + " arrow"), string_field(ja, "name", where + " arrow"),
                        string_field(ja, "target", where + " arrow")};
                m.graph.add_arrow(a);
                ElementInfo info;
                if (auto t = optional_string(ja, "type", where + " arrow")) pending.push_back({m.name, a, *t});
                if (auto p = optional_string(ja, "potency", where)) info.potency = parse_potency(*p);
                if (auto mu = optional_string(ja, "multiplicity", where)) info.multiplicity = parse_multiplicity(*mu);
                m.info[Element{a}] = info;
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::SchemaError) throw;
            throw Error(ErrorKind::SchemaError, where + ": " + e.what());
        } catch (const json::exception& e) {
            throw Error(ErrorKind::SchemaError, where + ": " + e.what());
        }
        models.push_back(std::move(m));
    }

    Hierarchy h = Hierarchy::from_models(std::move(models));
    for (const auto& [name, level] : stated_levels)
        if (h.model(name).level != level)
            throw Error(ErrorKind::SchemaError, "model '" + name + "' is stated at level " + std::to_string(level) +
                                                    " but sits at level " + std::to_string(h.model(name).level));

    // Arrow types are resolved parents first so that endpoint types are known
    // when a label is ambiguous.
    std::vector<std::string> names;
    for (const auto& m : h.models()) names.push_back(m.name);
    for (const auto& name : names) {
        Model m = h.model(name);
        bool touched = false;
        for (const auto& p : pending) {
            if (p.model != m.name) continue;
            auto parts = split_dots(p.type);
            const std::string where = "arrow " + to_string(p.arrow) + " in '" + m.name + "'";
            if (parts.size() != 2 && parts.size() != 4)
                throw Error(ErrorKind::SchemaError, where + ": type '" + p.type + "' is malformed");
            const Model* tm = h.find(parts[0]);
            if (!tm) throw Error(ErrorKind::SchemaError, where + ": unknown model '" + parts[0] + "'");
            std::vector<Arrow> candidates;
            if (parts.size() == 4) {
                Arrow t{parts[1], parts[2], parts[3]};
                if (tm->graph.has_arrow(t)) candidates.push_back(t);
            } else {
                for (const auto& a : tm->graph.arrows())
                    if (a.label == parts[1]) candidates.push_back(a);
            }
            if (candidates.size() > 1) {
                auto endpoint_type = [&](const std::string& end) -> std::optional<Element> {
                    if (tm->level == m.level) {
                        const auto& t = m.at(Element{end}).type;
                        return t ? std::optional<Element>(t->element) : std::nullopt;
                    }
                    return type_at_level(h, m, Element{end}, tm->level);
                };
                std::vector<Arrow> fitting;
                for (const auto& c : candidates)
                    if (endpoint_type(p.arrow.source) == Element{c.source} &&
                        endpoint_type(p.arrow.target) == Element{c.target})
                        fitting.push_back(c);
                candidates = fitting;
            }
            if (candidates.size() != 1)
                throw Error(ErrorKind::SchemaError, where + ": type '" + p.type + "' " +
                                                        (candidates.empty() ? "does not exist" : "is ambiguous"));
            m.info[Element{p.arrow}].type = TypeRef{tm->name, candidates.front()};
            touched = true;
        }
        if (touched) h = h.with_model(std::move(m));
    }

    for (const auto& m : h.models())
        for (const auto& n : m.graph.nodes()) {
            const ElementInfo& info = m.at(Element{n});
            for (const auto& s : info.supertypes) {
                const auto& st = m.at(Element{s}).type;
                if (info.type && st && *info.type != *st)
                    throw Error(ErrorKind::SchemaError, "model '" + m.name + "': node '" + n +
                                                            "' declares a type different from its supertype '" + s + "'");
            }
        }
    return h;
}

Hierarchy load_hierarchy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::NotFound, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_hierarchy(ss.str());
}

std::string type_name(const Hierarchy& h, const TypeRef& ref) {
    if (is_node(ref.element)) return ref.model + "." + as_node(ref.element);
    const Arrow& a = as_arrow(ref.element);
    std::size_t same_label = 0;
    for (const auto& b : h.model(ref.model).graph.arrows())
        if (b.label == a.label) ++same_label;
    if (same_label == 1) return ref.model + "." + a.label;
    return ref.model + "." + a.source + "." + a.label + "." + a.target;
}

std::string dump_hierarchy(const Hierarchy& h) {
    ordered_json doc;
    doc["models"] = ordered_json::array();
    const Potency default_potency;
    const Multiplicity default_multiplicity;
    for (const auto& m : h.models()) {
        ordered_json jm;
        jm["name"] = m.name;
        jm["parent"] = m.parent ? ordered_json(*m.parent) : ordered_json(nullptr);
        jm["level"] = m.level;
        jm["nodes"] = ordered_json::array();
        for (const auto& n : m.graph.nodes()) {
            const ElementInfo& info = m.at(Element{n});
            ordered_json jn;
            jn["name"] = n;
            if (info.type) jn["type"] = type_name(h, *info.type);
            if (info.potency != default_potency) jn["potency"] = to_string(info.potency);
            if (!info.supertypes.empty()) jn["supertypes"] = info.supertypes;
            jm["nodes"].push_back(std::move(jn));
        }
        jm["arrows"] = ordered_json::array();
        for (const auto& a : m.graph.arrows()) {
            const ElementInfo& info = m.at(Element{a});
            ordered_json ja;
            ja["name"] = a.label;
            ja["source"] = a.source;
            ja["target"] = a.target;
            if (info.type) ja["type"] = type_name(h, *info.type);
            if (info.potency != default_potency) ja["potency"] = to_string(info.potency);
            if (info.multiplicity != default_multiplicity) ja["multiplicity"] = to_string(info.multiplicity);
            jm["arrows"].push_back(std::move(ja));
        }
        doc["models"].push_back(std::move(jm));
    }
    return doc.dump(2) + "\n";
}

void save_hierarchy(const Hierarchy& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::NotFound, "cannot write '" + path + "'");
    out << dump_hierarchy(h);
}

} // namespace mlm
