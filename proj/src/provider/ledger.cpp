#include <fstream>
#include <sstream>

#include "pbp/error.hpp"
#include "pbp/provider.hpp"

namespace pbp {

std::string_view to_string(Purpose p) {
    switch (p) {
        case Purpose::generation: return "generation";
        case Purpose::ranking: return "ranking";
        case Purpose::consolidation: return "consolidation";
        case Purpose::classification: return "classification";
        case Purpose::stepback_1: return "stepback-1";
        case Purpose::stepback_2: return "stepback-2";
    }
    return "?";
}

Purpose purpose_from_string(std::string_view s) {
    for (auto p : {Purpose::generation, Purpose::ranking, Purpose::consolidation, Purpose::classification,
                   Purpose::stepback_1, Purpose::stepback_2}) {
        if (to_string(p) == s) return p;
    }
    throw ProviderError("unknown purpose tag '" + std::string(s) + "'");
}

bool is_classification_stage(Purpose p) {
    return p == Purpose::classification || p == Purpose::stepback_1 || p == Purpose::stepback_2;
}

void CallLedger::append(std::string digest, std::string agent_id, Purpose purpose, bool cache_hit) {
    std::lock_guard lock(mu_);
    entries_.push_back({entries_.size(), std::move(digest), std::move(agent_id), purpose, cache_hit});
}

std::vector<LedgerEntry> CallLedger::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t CallLedger::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::size_t CallLedger::count(Purpose p) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.purpose == p;
    return n;
}

std::map<Purpose, std::size_t> CallLedger::counts() const {
    std::lock_guard lock(mu_);
    std::map<Purpose, std::size_t> out;
    for (const auto& e : entries_) ++out[e.purpose];
    return out;
}

void CallLedger::clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
}

void CallLedger::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ProviderError("cannot write ledger " + path.string());
    out << "seq,digest,agent_id,purpose,cache_hit\n";
    for (const auto& e : entries()) {
        out << e.seq << ',' << e.digest << ',' << e.agent_id << ',' << to_string(e.purpose) << ','
            << (e.cache_hit ? 1 : 0) << '\n';
    }
}

std::vector<LedgerEntry> CallLedger::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProviderError("cannot read ledger " + path.string());
    std::vector<LedgerEntry> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string seq, digest, agent, purpose, hit;
        std::getline(ss, seq, ',');
        std::getline(ss, digest, ',');
        std::getline(ss, agent, ',');
        std::getline(ss, purpose, ',');
        std::getline(ss, hit, ',');
        out.push_back({std::stoull(seq), digest, agent, purpose_from_string(purpose), hit == "1"});
    }
    return out;
}

}  // namespace pbp
