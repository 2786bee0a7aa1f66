#include <algorithm>
#include <cctype>
#include <fstream>
#include <json.hpp>

#include "pbp/error.hpp"
#include "pbp/prompt.hpp"

namespace pbp {

std::string_view to_string(TemplateKind kind) {
    switch (kind) {
        case TemplateKind::generation: return "generation";
        case TemplateKind::classification: return "classification";
        case TemplateKind::ranking: return "ranking";
        case TemplateKind::consolidation: return "consolidation";
        case TemplateKind::vanilla: return "vanilla";
        case TemplateKind::cot: return "cot";
        case TemplateKind::stepback_q: return "stepback_q";
        case TemplateKind::stepback_a: return "stepback_a";
        case TemplateKind::fewshot: return "fewshot";
    }
    return "?";
}

TemplateKind template_kind_from_string(std::string_view s) {
    for (auto k : kAllTemplateKinds) {
        if (to_string(k) == s) return k;
    }
    throw TemplateError("unknown template kind '" + std::string(s) + "'");
}

namespace {

bool is_ident_start(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

enum class TagType { none, slot, open, close };

struct Tag {
    TagType type = TagType::none;
    std::string name;
    std::size_t length = 0;  // characters consumed, including braces
};

// Recognises "{name}", "{#name}" and "{/name}" at `pos`; anything else is literal text.
Tag read_tag(std::string_view body, std::size_t pos) {
    Tag tag;
    if (body[pos] != '{') return tag;
    std::size_t i = pos + 1;
    TagType type = TagType::slot;
    if (i < body.size() && (body[i] == '#' || body[i] == '/')) {
        type = body[i] == '#' ? TagType::open : TagType::close;
        ++i;
    }
    if (i >= body.size() || !is_ident_start(body[i])) return tag;
    std::size_t start = i;
    while (i < body.size() && is_ident(body[i])) ++i;
    if (i >= body.size() || body[i] != '}') return tag;
    tag.type = type;
    tag.name = std::string(body.substr(start, i - start));
    tag.length = i + 1 - pos;
    return tag;
}

// Renders body[pos..) until the matching close tag of `section` (or end of body
// when section is empty). Returns the position just after the close tag.
std::size_t render_range(const PromptTemplate& tmpl, const Bindings& bindings, std::size_t pos,
                         const std::string& section, bool emit, std::string& out) {
    std::string_view body = tmpl.body;
    auto lookup = [&](const std::string& name) -> const std::string& {
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            throw TemplateError("unbound slot {" + name + "} in template " + tmpl.family + "/" +
                                std::string(to_string(tmpl.kind)));
        }
        return it->second;
    };
    while (pos < body.size()) {
        Tag tag = read_tag(body, pos);
        switch (tag.type) {
            case TagType::none:
                if (emit) out.push_back(body[pos]);
                ++pos;
                break;
            case TagType::slot: {
                const std::string& value = lookup(tag.name);
                if (emit) out += value;
                pos += tag.length;
                break;
            }
            case TagType::open: {
                bool inner = emit && !lookup(tag.name).empty();
                pos = render_range(tmpl, bindings, pos + tag.length, tag.name, inner, out);
                break;
            }
            case TagType::close:
                if (tag.name != section) {
                    throw TemplateError("unbalanced section {/" + tag.name + "} in template " + tmpl.family + "/" +
                                        std::string(to_string(tmpl.kind)));
                }
                return pos + tag.length;
        }
    }
    if (!section.empty()) {
        throw TemplateError("unterminated section {#" + section + "} in template " + tmpl.family + "/" +
                            std::string(to_string(tmpl.kind)));
    }
    return pos;
}

}  // namespace

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    std::string out;
    out.reserve(tmpl.body.size() + 256);
    render_range(tmpl, bindings, 0, "", true, out);
    return out;
}

std::vector<std::string> template_slots(const PromptTemplate& tmpl) {
    std::vector<std::string> slots;
    std::string_view body = tmpl.body;
    for (std::size_t pos = 0; pos < body.size();) {
        Tag tag = read_tag(body, pos);
        if (tag.type == TagType::none) {
            ++pos;
            continue;
        }
        if (tag.type != TagType::close && std::find(slots.begin(), slots.end(), tag.name) == slots.end()) {
            slots.push_back(tag.name);
        }
        pos += tag.length;
    }
    return slots;
}

void TemplateRegistry::add(PromptTemplate tmpl) {
    if (tmpl.family.empty()) throw TemplateError("template family must be non-empty");
    std::string family = tmpl.family;
    TemplateKind kind = tmpl.kind;
    entries_[family][kind] = std::move(tmpl);
}

void TemplateRegistry::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TemplateError("cannot open template file " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        add({j.at("family").get<std::string>(), template_kind_from_string(j.at("kind").get<std::string>()),
             j.at("body").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw TemplateError("template file " + path.string() + ": " + e.what());
    }
}

const PromptTemplate& TemplateRegistry::get(std::string_view family, TemplateKind kind) const {
    auto fit = entries_.find(family);
    if (fit == entries_.end()) throw TemplateError("unknown template family '" + std::string(family) + "'");
    auto kit = fit->second.find(kind);
    if (kit == fit->second.end()) {
        throw TemplateError("template family '" + std::string(family) + "' has no '" +
                            std::string(to_string(kind)) + "' template");
    }
    return kit->second;
}

bool TemplateRegistry::has(std::string_view family, TemplateKind kind) const {
    auto fit = entries_.find(family);
    return fit != entries_.end() && fit->second.count(kind) > 0;
}

std::vector<std::string> TemplateRegistry::families() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

std::vector<TemplateKind> TemplateRegistry::missing_kinds(std::string_view family) const {
    std::vector<TemplateKind> out;
    for (auto k : kAllTemplateKinds) {
        if (!has(family, k)) out.push_back(k);
    }
    return out;
}

std::string format_demos(const DemoSet& demos, const TaskSpec& task) {
    std::string out;
    for (const auto& ex : demos.examples) {
        if (!out.empty()) out += '\n';
        out += "Statement: " + ex.text;
        if (demos.include_labels) out += "\nAnswer: " + task.render_label_word(ex.label);
    }
    return out;
}

std::string format_candidates(const std::vector<LabeledText>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += "\n\n";
        out += item.id + ": " + item.text;
    }
    return out;
}

std::string format_label_words(const TaskSpec& task) {
    std::string out;
    for (const auto& w : task.label_words()) {
        if (!out.empty()) out += ", ";
        out += w;
    }
    return out;
}

}  // namespace pbp
