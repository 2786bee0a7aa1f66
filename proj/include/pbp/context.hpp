#pragma once

#include <cstddef>

#include "pbp/prompt.hpp"
#include "pbp/provider.hpp"

namespace pbp {

/// Everything a pipeline stage needs to issue calls.
struct StageContext {
    Provider& provider;
    const TemplateRegistry& templates;
    SamplingParams sampling;
    std::size_t concurrency = 4;
};

}  // namespace pbp
