#include "role/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>

#include "role/error.hpp"

namespace role {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 4> phase_names{"plan", "prepare", "learn", "reflect"};
constexpr std::array<std::string_view, 3> group_names{"cognitive", "meta_cognitive",
                                                      "resource_management"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
    auto it = std::lower_bound(items.begin(), items.end(), id,
                               [](const T& item, std::string_view key) { return item.id < key; });
    return it != items.end() && it->id == id ? &*it : nullptr;
}

template <typename T>
void sort_by_id(std::vector<T>& items) {
    std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

std::string str_field(const json& j, const char* key, bool required = true) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) throw Error(ErrorCode::parse_error, std::string("missing field '") + key + "'");
        return {};
    }
    if (!it->is_string()) throw Error(ErrorCode::parse_error, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> str_list(const json& j, const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) throw Error(ErrorCode::parse_error, std::string("field '") + key + "' must be a list");
    for (const auto& v : *it) {
        if (!v.is_string()) throw Error(ErrorCode::parse_error, std::string("field '") + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

const json& section(const json& doc, const char* key) {
    static const json empty = json::array();
    auto it = doc.find(key);
    if (it == doc.end()) return empty;
    if (!it->is_array()) throw Error(ErrorCode::parse_error, std::string("section '") + key + "' must be a list");
    return *it;
}

}  // namespace

std::string_view to_string(Phase p) { return phase_names[static_cast<std::size_t>(p)]; }

std::optional<Phase> parse_phase(std::string_view s) {
    for (std::size_t i = 0; i < phase_names.size(); ++i)
        if (phase_names[i] == s) return static_cast<Phase>(i);
    return std::nullopt;
}

Phase next_phase(Phase p) { return static_cast<Phase>((static_cast<int>(p) + 1) % 4); }

std::string_view to_string(StrategyGroup g) { return group_names[static_cast<std::size_t>(g)]; }

std::optional<StrategyGroup> parse_group(std::string_view s) {
    for (std::size_t i = 0; i < group_names.size(); ++i)
        if (group_names[i] == s) return static_cast<StrategyGroup>(i);
    return std::nullopt;
}

std::string_view to_string(CompetenceKind k) {
    switch (k) {
        case CompetenceKind::domain: return "domain";
        case CompetenceKind::tool: return "tool";
        case CompetenceKind::srl: return "srl";
    }
    return "?";
}

EqfLevel::EqfLevel(int value) : value_(value) {
    if (value < min || value > max)
        throw Error(ErrorCode::validation_error,
                    "EQF level must be in 1..8, got " + std::to_string(value));
}

CompetenceKey key_of(const Competence& c) {
    return std::visit(
        [](const auto& v) -> CompetenceKey {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DomainCompetence>)
                return {CompetenceKind::domain, v.concept_id, v.context};
            else if constexpr (std::is_same_v<T, ToolCompetence>)
                return {CompetenceKind::tool, v.tool, v.technique};
            else
                return {CompetenceKind::srl, v.strategy, {}};
        },
        c);
}

int level_of(const Competence& c) {
    return std::visit([](const auto& v) { return v.level.value(); }, c);
}

Competence with_level(const Competence& c, EqfLevel level) {
    return std::visit(
        [&](auto v) -> Competence {
            v.level = level;
            return v;
        },
        c);
}

json to_json(const Competence& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DomainCompetence>)
                return {{"type", "domain"}, {"concept", v.concept_id}, {"context", v.context},
                        {"level", v.level.value()}};
            else if constexpr (std::is_same_v<T, ToolCompetence>)
                return {{"type", "tool"}, {"tool", v.tool}, {"technique", v.technique},
                        {"level", v.level.value()}};
            else
                return {{"type", "srl"}, {"strategy", v.strategy}, {"level", v.level.value()}};
        },
        c);
}

Competence competence_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "competence must be an object");
    const auto type = str_field(j, "type");
    const EqfLevel level{j.value("level", 1)};
    if (type == "domain") return DomainCompetence{str_field(j, "concept"), str_field(j, "context"), level};
    if (type == "tool") return ToolCompetence{str_field(j, "tool"), str_field(j, "technique"), level};
    if (type == "srl") return SrlCompetence{str_field(j, "strategy"), level};
    throw Error(ErrorCode::parse_error, "unknown competence type '" + type + "'");
}

struct Catalog::Paradata {
    mutable std::mutex mutex;
    std::vector<std::uint64_t> counts;
};

Catalog::Catalog() : paradata_(std::make_unique<Paradata>()) {}
Catalog::Catalog(Catalog&&) noexcept = default;
Catalog& Catalog::operator=(Catalog&&) noexcept = default;
Catalog::~Catalog() = default;

Catalog Catalog::from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::parse_error, "catalog document must be an object");

    Catalog cat;
    std::vector<std::string> problems;

    cat.version_ = doc.value("catalog_version", 1);

    std::set<Phase> phases;
    for (const auto& p : section(doc, "phases")) {
        if (!p.is_string()) throw Error(ErrorCode::parse_error, "phases must be strings");
        auto phase = parse_phase(p.get<std::string>());
        if (!phase)
            problems.push_back("unknown phase '" + p.get<std::string>() + "'");
        else
            phases.insert(*phase);
    }
    if (phases.size() != 4 || section(doc, "phases").size() != 4)
        problems.emplace_back("phase set must be exactly 4 (plan, prepare, learn, reflect)");

    for (const auto& s : section(doc, "strategies")) {
        Strategy st;
        st.id = str_field(s, "id");
        st.name = str_field(s, "name", false);
        if (st.name.empty()) st.name = st.id;
        auto g = parse_group(str_field(s, "group"));
        auto ph = parse_phase(str_field(s, "phase"));
        if (!g) problems.push_back("strategy '" + st.id + "' has unknown group");
        if (!ph) problems.push_back("strategy '" + st.id + "' has unknown phase");
        st.group = g.value_or(StrategyGroup::cognitive);
        st.phase = ph.value_or(Phase::plan);
        cat.strategies_.push_back(std::move(st));
    }

    for (const auto& t : section(doc, "techniques")) {
        Technique tq;
        tq.id = str_field(t, "id");
        tq.name = str_field(t, "name", false);
        if (tq.name.empty()) tq.name = tq.id;
        tq.strategy = str_field(t, "strategy");
        cat.techniques_.push_back(std::move(tq));
    }

    for (const auto& c : section(doc, "categories")) {
        Category cg;
        cg.id = str_field(c, "id");
        for (const auto& p : str_list(c, "phases")) {
            auto ph = parse_phase(p);
            if (!ph)
                problems.push_back("category '" + cg.id + "' maps to unknown phase '" + p + "'");
            else
                cg.phases.push_back(*ph);
        }
        if (cg.phases.empty()) problems.push_back("category '" + cg.id + "' must map to at least one phase");
        if (std::find(category_labels.begin(), category_labels.end(), cg.id) == category_labels.end())
            problems.push_back("category '" + cg.id + "' is not one of the 7 store categories");
        cat.categories_.push_back(std::move(cg));
    }

    for (const auto& v : section(doc, "vocabularies")) {
        Vocabulary voc{str_field(v, "id"), str_list(v, "concepts")};
        std::sort(voc.concepts.begin(), voc.concepts.end());
        cat.vocabularies_.push_back(std::move(voc));
    }

    for (const auto& w : section(doc, "widgets")) {
        WidgetDescriptor wd;
        wd.id = str_field(w, "id");
        wd.title = str_field(w, "title", false);
        wd.description = str_field(w, "description", false);
        wd.launch_url = str_field(w, "launch_url", false);
        wd.techniques = str_list(w, "techniques");
        wd.categories = str_list(w, "categories");
        wd.srl = w.value("srl", false);
        wd.add_count = w.value("add_count", std::uint64_t{0});
        cat.widgets_.push_back(std::move(wd));
    }

    for (const auto& b : section(doc, "bundles"))
        cat.bundles_.push_back({str_field(b, "id"), str_field(b, "title", false), str_list(b, "widgets")});

    for (const auto& t : section(doc, "templates"))
        cat.templates_.push_back({str_field(t, "id"), str_field(t, "title", false), str_list(t, "entities")});

    sort_by_id(cat.strategies_);
    sort_by_id(cat.techniques_);
    sort_by_id(cat.vocabularies_);
    sort_by_id(cat.widgets_);
    sort_by_id(cat.bundles_);
    sort_by_id(cat.templates_);

    auto check_unique = [&problems](const auto& items, std::string_view what) {
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].id == items[i - 1].id)
                problems.push_back("duplicate " + std::string(what) + " id '" + items[i].id + "'");
    };
    check_unique(cat.strategies_, "strategy");
    check_unique(cat.techniques_, "technique");
    check_unique(cat.widgets_, "widget");
    check_unique(cat.bundles_, "bundle");
    check_unique(cat.templates_, "template");

    // Phase, strategy and technique ids share one namespace for entity lookup.
    for (const auto& s : cat.strategies_) {
        if (parse_phase(s.id)) problems.push_back("strategy id '" + s.id + "' collides with a phase name");
        if (find_by_id(cat.techniques_, s.id))
            problems.push_back("id '" + s.id + "' is both a strategy and a technique");
    }
    for (const auto& t : cat.techniques_) {
        if (parse_phase(t.id)) problems.push_back("technique id '" + t.id + "' collides with a phase name");
        if (!find_by_id(cat.strategies_, t.strategy))
            problems.push_back("technique '" + t.id + "' references unknown strategy '" + t.strategy + "'");
    }

    for (const auto& w : cat.widgets_) {
        for (const auto& t : w.techniques)
            if (!find_by_id(cat.techniques_, t))
                problems.push_back("widget '" + w.id + "' references unknown technique '" + t + "'");
        for (const auto& c : w.categories)
            if (std::none_of(cat.categories_.begin(), cat.categories_.end(),
                             [&](const Category& cg) { return cg.id == c; }))
                problems.push_back("widget '" + w.id + "' references unknown category '" + c + "'");
    }

    for (const auto& b : cat.bundles_) {
        if (b.widgets.empty()) problems.push_back("bundle '" + b.id + "' has no widgets");
        for (const auto& w : b.widgets)
            if (!find_by_id(cat.widgets_, w))
                problems.push_back("bundle '" + b.id + "' references unknown widget '" + w + "'");
    }

    for (const auto& t : cat.templates_) {
        if (t.entities.empty()) problems.push_back("template '" + t.id + "' has no entities");
        for (const auto& e : t.entities)
            if (!parse_phase(e) && !find_by_id(cat.strategies_, e) && !find_by_id(cat.techniques_, e))
                problems.push_back("template '" + t.id + "' references unknown entity '" + e + "'");
    }

    if (!problems.empty()) throw ValidationError(std::move(problems));

    for (std::size_t i = 0; i < cat.widgets_.size(); ++i) {
        for (const auto& t : cat.widgets_[i].techniques) cat.widgets_by_technique_[t].push_back(i);
        cat.paradata_->counts.push_back(cat.widgets_[i].add_count);
    }
    return cat;
}

std::vector<WidgetDescriptor> Catalog::widgets() const {
    std::vector<WidgetDescriptor> out = widgets_;
    std::lock_guard lock(paradata_->mutex);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].add_count = paradata_->counts[i];
    return out;
}

const Strategy* Catalog::find_strategy(std::string_view id) const { return find_by_id(strategies_, id); }
const Technique* Catalog::find_technique(std::string_view id) const { return find_by_id(techniques_, id); }
const Template* Catalog::find_template(std::string_view id) const { return find_by_id(templates_, id); }

const Category* Catalog::find_category(std::string_view id) const {
    auto it = std::find_if(categories_.begin(), categories_.end(), [&](const Category& c) { return c.id == id; });
    return it == categories_.end() ? nullptr : &*it;
}

std::size_t Catalog::widget_index(std::string_view id) const {
    auto it = std::lower_bound(widgets_.begin(), widgets_.end(), id,
                               [](const WidgetDescriptor& w, std::string_view key) { return w.id < key; });
    if (it == widgets_.end() || it->id != id) return widgets_.size();
    return static_cast<std::size_t>(it - widgets_.begin());
}

bool Catalog::has_widget(std::string_view id) const { return widget_index(id) < widgets_.size(); }

std::optional<WidgetDescriptor> Catalog::find_widget(std::string_view id) const {
    const auto i = widget_index(id);
    if (i == widgets_.size()) return std::nullopt;
    WidgetDescriptor w = widgets_[i];
    std::lock_guard lock(paradata_->mutex);
    w.add_count = paradata_->counts[i];
    return w;
}

std::vector<const Strategy*> Catalog::strategies_in(Phase p) const {
    std::vector<const Strategy*> out;
    for (const auto& s : strategies_)
        if (s.phase == p) out.push_back(&s);
    return out;
}

std::vector<Technique> Catalog::techniques_for(std::string_view strategy) const {
    if (!find_strategy(strategy))
        throw Error(ErrorCode::unknown_strategy, "unknown strategy '" + std::string(strategy) + "'");
    std::vector<Technique> out;
    for (const auto& t : techniques_)
        if (t.strategy == strategy) out.push_back(t);
    return out;
}

std::vector<WidgetDescriptor> Catalog::collect(const std::vector<std::string>& techniques) const {
    std::set<std::size_t> hits;
    for (const auto& t : techniques) {
        auto it = widgets_by_technique_.find(t);
        if (it != widgets_by_technique_.end()) hits.insert(it->second.begin(), it->second.end());
    }
    std::vector<WidgetDescriptor> out;
    out.reserve(hits.size());
    std::lock_guard lock(paradata_->mutex);
    for (auto i : hits) {  // indices ascend, widgets_ is id-sorted
        out.push_back(widgets_[i]);
        out.back().add_count = paradata_->counts[i];
    }
    return out;
}

std::vector<WidgetDescriptor> Catalog::widgets_for(Phase p) const {
    std::vector<std::string> techs;
    for (const auto& t : techniques_) {
        const auto* s = find_strategy(t.strategy);
        if (s && s->phase == p) techs.push_back(t.id);
    }
    return collect(techs);
}

std::vector<WidgetDescriptor> Catalog::widgets_for(std::string_view entity) const {
    if (auto p = parse_phase(entity)) return widgets_for(*p);
    if (find_strategy(entity)) {
        std::vector<std::string> techs;
        for (const auto& t : techniques_)
            if (t.strategy == entity) techs.push_back(t.id);
        return collect(techs);
    }
    if (find_technique(entity)) return collect({std::string(entity)});
    throw Error(ErrorCode::unknown_entity, "unknown entity '" + std::string(entity) + "'");
}

std::vector<Phase> Catalog::phases_of_widget(std::string_view widget) const {
    const auto i = widget_index(widget);
    if (i == widgets_.size()) throw Error(ErrorCode::unknown_widget, "unknown widget '" + std::string(widget) + "'");
    std::set<Phase> phases;
    for (const auto& t : widgets_[i].techniques)
        if (const auto* tq = find_technique(t))
            if (const auto* s = find_strategy(tq->strategy)) phases.insert(s->phase);
    return {phases.begin(), phases.end()};
}

std::vector<WidgetDescriptor> Catalog::search_widgets(std::string_view query,
                                                      std::optional<std::string_view> category) const {
    const std::string needle = lower(query);
    std::vector<WidgetDescriptor> out;
    for (auto& w : widgets()) {
        if (category && std::find(w.categories.begin(), w.categories.end(), *category) == w.categories.end())
            continue;
        if (!needle.empty() && lower(w.title).find(needle) == std::string::npos &&
            lower(w.description).find(needle) == std::string::npos)
            continue;
        out.push_back(std::move(w));
    }
    std::sort(out.begin(), out.end(), [](const WidgetDescriptor& a, const WidgetDescriptor& b) {
        if (a.add_count != b.add_count) return a.add_count > b.add_count;
        return a.id < b.id;
    });
    return out;
}

std::uint64_t Catalog::record_widget_added(std::string_view widget) {
    const auto i = widget_index(widget);
    if (i == widgets_.size()) throw Error(ErrorCode::unknown_widget, "unknown widget '" + std::string(widget) + "'");
    std::lock_guard lock(paradata_->mutex);
    return ++paradata_->counts[i];
}

std::uint64_t Catalog::add_count(std::string_view widget) const {
    const auto i = widget_index(widget);
    if (i == widgets_.size()) throw Error(ErrorCode::unknown_widget, "unknown widget '" + std::string(widget) + "'");
    std::lock_guard lock(paradata_->mutex);
    return paradata_->counts[i];
}

void Catalog::check(const Competence& c) const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::unknown_catalog_reference, what); };
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DomainCompetence>) {
                const auto* voc = find_by_id(vocabularies_, v.context);
                if (!voc) fail("unknown concept vocabulary '" + v.context + "'");
                if (!std::binary_search(voc->concepts.begin(), voc->concepts.end(), v.concept_id))
                    fail("concept '" + v.concept_id + "' not in vocabulary '" + v.context + "'");
            } else if constexpr (std::is_same_v<T, ToolCompetence>) {
                if (!has_widget(v.tool)) fail("unknown tool '" + v.tool + "'");
                if (!find_technique(v.technique)) fail("unknown technique '" + v.technique + "'");
            } else {
                if (!find_strategy(v.strategy)) fail("unknown strategy '" + v.strategy + "'");
            }
        },
        c);
}

nlohmann::json Catalog::paradata_json() const {
    json out = json::object();
    std::lock_guard lock(paradata_->mutex);
    for (std::size_t i = 0; i < widgets_.size(); ++i) out[widgets_[i].id] = paradata_->counts[i];
    return out;
}

void Catalog::save_paradata(const std::filesystem::path& path) const {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << paradata_json().dump(2) << '\n';
        if (!out) throw Error(ErrorCode::parse_error, "cannot write paradata to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void Catalog::load_paradata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("paradata: ") + e.what());
    }
    std::lock_guard lock(paradata_->mutex);
    for (const auto& [id, count] : doc.items()) {
        const auto i = widget_index(id);
        if (i < widgets_.size()) paradata_->counts[i] = count.get<std::uint64_t>();
    }
}

Catalog load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse_error, "cannot open catalog " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return Catalog::from_json(doc);
}

}  // namespace role
