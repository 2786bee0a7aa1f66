#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pbp/corpus.hpp"

namespace pbp {

enum class TemplateKind {
    generation,
    classification,
    ranking,
    consolidation,
    vanilla,
    cot,
    stepback_q,
    stepback_a,
    fewshot,
};

inline constexpr std::array<TemplateKind, 9> kAllTemplateKinds = {
    TemplateKind::generation, TemplateKind::classification, TemplateKind::ranking,
    TemplateKind::consolidation, TemplateKind::vanilla,     TemplateKind::cot,
    TemplateKind::stepback_q,  TemplateKind::stepback_a,    TemplateKind::fewshot,
};

std::string_view to_string(TemplateKind kind);
TemplateKind template_kind_from_string(std::string_view s);

/// A prompt body with `{slot}` placeholders and optional `{#slot}...{/slot}`
/// sections that are emitted only when the slot is bound to non-empty text.
/// Known slots: demos, principle, candidates, input, label_words.
struct PromptTemplate {
    std::string family;
    TemplateKind kind = TemplateKind::vanilla;
    std::string body;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Substitutes every slot verbatim in a single pass; bound text is never
/// re-scanned for slots. Throws TemplateError naming the first unbound slot.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/// Slot names referenced by the body, in first-appearance order.
std::vector<std::string> template_slots(const PromptTemplate& tmpl);

class TemplateRegistry {
public:
    /// Registry preloaded with the four built-in families.
    static TemplateRegistry with_builtins();

    void add(PromptTemplate tmpl);

    /// Loads a JSON template file {family, kind, body}; replaces an existing entry.
    void load_file(const std::filesystem::path& path);

    const PromptTemplate& get(std::string_view family, TemplateKind kind) const;
    bool has(std::string_view family, TemplateKind kind) const;
    std::vector<std::string> families() const;

    /// Kinds missing from `family`; empty when the family is complete.
    std::vector<TemplateKind> missing_kinds(std::string_view family) const;

private:
    std::map<std::string, std::map<TemplateKind, PromptTemplate>, std::less<>> entries_;
};

/// One "Statement: <text>" line per demo, followed by "Answer: <word>" when
/// labels are included.
std::string format_demos(const DemoSet& demos, const TaskSpec& task);

struct LabeledText {
    std::string id;
    std::string text;
};

/// "P3: <text>" blocks separated by blank lines, in the given order.
std::string format_candidates(const std::vector<LabeledText>& items);

/// Label words in class-index order joined by ", ".
std::string format_label_words(const TaskSpec& task);

// --- token accounting -------------------------------------------------------

struct TokenEstimate {
    std::size_t count = 0;
    std::string estimator_id;

    bool operator==(const TokenEstimate&) const = default;
};

class TokenEstimator {
public:
    virtual ~TokenEstimator() = default;
    virtual std::string id() const = 0;
    virtual std::size_t count(std::string_view text) const = 0;
};

/// Default estimator: each maximal run of letters/digits (bytes >= 0x80 count
/// as letters) is one token and every other non-space character is one token.
class SegmentingEstimator final : public TokenEstimator {
public:
    static constexpr std::string_view kId = "segment/v1";
    std::string id() const override { return std::string(kId); }
    std::size_t count(std::string_view text) const override;
};

/// External estimator: runs a shell command with the text on stdin and reads
/// a single integer from stdout.
class CommandEstimator final : public TokenEstimator {
public:
    CommandEstimator(std::string id, std::string command) : id_(std::move(id)), command_(std::move(command)) {}
    std::string id() const override { return id_; }
    std::size_t count(std::string_view text) const override;

private:
    std::string id_;
    std::string command_;
};

class EstimatorRegistry {
public:
    EstimatorRegistry();
    void add(std::shared_ptr<const TokenEstimator> estimator);
    /// Throws TemplateError for an unknown id.
    const TokenEstimator& get(std::string_view estimator_id) const;

private:
    std::map<std::string, std::shared_ptr<const TokenEstimator>, std::less<>> estimators_;
};

TokenEstimate estimate_tokens(std::string_view text, const TokenEstimator& estimator);
TokenEstimate estimate_tokens(std::string_view text, const EstimatorRegistry& registry,
                              std::string_view estimator_id = SegmentingEstimator::kId);

}  // namespace pbp
