#include <cctype>
#include <sstream>

#include "pbp/error.hpp"
#include "pbp/principle.hpp"

namespace pbp {

namespace {

constexpr std::string_view kMarkers[] = {"key principles", "principle", "based on your analysis"};

std::string_view strip_decoration(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == '#' || s[i] == '*' ||
                            s[i] == '_' || s[i] == '>')) {
        ++i;
    }
    return s.substr(i);
}

// A header line opens the principle section. Enumerated items such as
// "Principle 1: ..." are content, not headers.
bool is_marker(std::string_view line) {
    std::string lowered = to_lower(strip_decoration(line));
    for (auto m : kMarkers) {
        if (lowered.rfind(m, 0) != 0) continue;
        if (m == "principle") {
            std::size_t i = m.size();
            if (i < lowered.size() && lowered[i] == 's') ++i;
            while (i < lowered.size() && lowered[i] == ' ') ++i;
            if (i < lowered.size() && (std::isdigit(static_cast<unsigned char>(lowered[i])) || lowered[i] == '#')) {
                return false;
            }
        }
        return true;
    }
    return false;
}

}  // namespace

std::string extract_principle(std::string_view raw_response) {
    std::vector<std::string> lines;
    {
        std::string buf(raw_response);
        std::istringstream in(buf);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.push_back(std::move(line));
        }
    }
    std::optional<std::size_t> marker;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_marker(lines[i])) marker = i;
    }
    std::string out;
    if (!marker) {
        out = trim(raw_response);
    } else {
        const std::string& header = lines[*marker];
        if (auto colon = header.find(':'); colon != std::string::npos) {
            std::string rest = trim(header.substr(colon + 1));
            while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.erase(rest.begin());
            if (!trim(rest).empty()) out = trim(rest);
        }
        for (std::size_t i = *marker + 1; i < lines.size(); ++i) {
            if (!out.empty()) out += '\n';
            out += lines[i];
        }
        out = trim(out);
    }
    if (out.empty()) throw StageError("principle extraction produced empty text");
    return out;
}

}  // namespace pbp
