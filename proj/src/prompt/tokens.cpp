#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

#include "pbp/error.hpp"
#include "pbp/prompt.hpp"

namespace pbp {

std::size_t SegmentingEstimator::count(std::string_view text) const {
    std::size_t tokens = 0;
    bool in_word = false;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            if (!in_word) ++tokens;
            in_word = true;
        } else {
            in_word = false;
            if (!std::isspace(c)) ++tokens;
        }
    }
    return tokens;
}

std::size_t CommandEstimator::count(std::string_view text) const {
    std::string tmpl = (std::filesystem::temp_directory_path() / "pbp-est-XXXXXX").string();
    int fd = ::mkstemp(tmpl.data());
    if (fd < 0) throw TemplateError("estimator '" + id_ + "': cannot create temp file");
    ::close(fd);
    struct Remove {
        std::string path;
        ~Remove() { std::remove(path.c_str()); }
    } cleanup{tmpl};
    {
        std::ofstream out(tmpl, std::ios::binary);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    const std::string cmd = command_ + " < '" + tmpl + "'";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"), ::pclose);
    if (!pipe) throw TemplateError("estimator '" + id_ + "': cannot run '" + command_ + "'");
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe.get())) output += buf;
    int status = ::pclose(pipe.release());
    std::string value = trim(output);
    if (status != 0 || value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw TemplateError("estimator '" + id_ + "' returned '" + value + "' (exit status " + std::to_string(status) +
                            ")");
    }
    return static_cast<std::size_t>(std::stoull(value));
}

EstimatorRegistry::EstimatorRegistry() { add(std::make_shared<SegmentingEstimator>()); }

void EstimatorRegistry::add(std::shared_ptr<const TokenEstimator> estimator) {
    std::string key = estimator->id();
    estimators_[key] = std::move(estimator);
}

const TokenEstimator& EstimatorRegistry::get(std::string_view estimator_id) const {
    auto it = estimators_.find(estimator_id);
    if (it == estimators_.end()) throw TemplateError("unknown estimator_id '" + std::string(estimator_id) + "'");
    return *it->second;
}

TokenEstimate estimate_tokens(std::string_view text, const TokenEstimator& estimator) {
    return {estimator.count(text), estimator.id()};
}

TokenEstimate estimate_tokens(std::string_view text, const EstimatorRegistry& registry, std::string_view estimator_id) {
    return estimate_tokens(text, registry.get(estimator_id));
}

}  // namespace pbp
