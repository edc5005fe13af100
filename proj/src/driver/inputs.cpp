#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "klrace/driver.hpp"

namespace klrace::driver {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

concrete::Value number(std::string_view s, int line)
{
    s = trim(s);
    concrete::Value v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw UsageError("inputs line " + std::to_string(line) + ": not an integer: '" + std::string(s) + "'");
    return v;
}

bool is_name(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

}  // namespace

concrete::Inputs parse_inputs(std::string_view text)
{
    concrete::Inputs out;
    std::istringstream in{std::string(text)};
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        std::string_view l = raw;
        if (auto hash = l.find('#'); hash != std::string_view::npos)
            l = l.substr(0, hash);
        l = trim(l);
        if (l.empty())
            continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("inputs line " + std::to_string(line) + ": expected 'name = value'");
        const std::string name(trim(l.substr(0, eq)));
        std::string_view rhs = trim(l.substr(eq + 1));
        if (!is_name(name))
            throw UsageError("inputs line " + std::to_string(line) + ": bad name '" + name + "'");
        if (out.arrays.count(name) || out.scalars.count(name))
            throw UsageError("inputs line " + std::to_string(line) + ": " + name + " bound twice");
        if (!rhs.empty() && rhs.front() == '[') {
            if (rhs.back() != ']')
                throw UsageError("inputs line " + std::to_string(line) + ": unterminated list");
            rhs = trim(rhs.substr(1, rhs.size() - 2));
            std::vector<concrete::Value> vals;
            while (!rhs.empty()) {
                const auto comma = rhs.find(',');
                vals.push_back(number(rhs.substr(0, comma), line));
                rhs = comma == std::string_view::npos ? std::string_view{} : trim(rhs.substr(comma + 1));
            }
            out.arrays[name] = std::move(vals);
        } else {
            out.scalars[name] = number(rhs, line);
        }
    }
    return out;
}

concrete::Inputs read_inputs(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f)
        throw UsageError("cannot read inputs file " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_inputs(ss.str());
}

std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::Analyze: return "analyze";
    case Mode::Oracle: return "oracle";
    case Mode::Both: return "both";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view s)
{
    if (s == "analyze")
        return Mode::Analyze;
    if (s == "oracle")
        return Mode::Oracle;
    if (s == "both")
        return Mode::Both;
    return std::nullopt;
}

std::string_view to_string(Agreement a)
{
    switch (a) {
    case Agreement::Agree: return "agree";
    case Agreement::AnalyzerOverApproximates: return "analyzer-over-approximates";
    case Agreement::KnownUnsoundMiss: return "known-unsound-miss";
    case Agreement::DisagreeUnexpected: return "disagree-unexpected";
    }
    return "?";
}

Agreement classify(symexec::Verdict a, concrete::OracleVerdict::Kind o)
{
    using V = symexec::Verdict;
    using O = concrete::OracleVerdict::Kind;
    switch (o) {
    case O::RaceFree:
        if (a == V::RaceFree)
            return Agreement::Agree;
        // A bounds or assertion failure the concrete run never hits.
        if (a == V::DefiniteError)
            return Agreement::DisagreeUnexpected;
        return Agreement::AnalyzerOverApproximates;
    case O::Race:
        if (a == V::PotentialRace)
            return Agreement::Agree;
        if (a == V::RaceFree)
            return Agreement::KnownUnsoundMiss;
        return Agreement::AnalyzerOverApproximates;
    case O::RuntimeError:
        if (a == V::DefiniteError)
            return Agreement::Agree;
        if (a == V::RaceFree)
            return Agreement::DisagreeUnexpected;
        return Agreement::AnalyzerOverApproximates;
    case O::Inconclusive:
        return a == V::Inconclusive ? Agreement::Agree : Agreement::AnalyzerOverApproximates;
    }
    return Agreement::DisagreeUnexpected;
}

}  // namespace klrace::driver
