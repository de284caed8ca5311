#include <algorithm>
#include <cctype>
#include <regex>

#include "liquidsense/perception.hpp"

namespace liquidsense {

namespace {

std::string normalize(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '-' || c == '\n' || c == '\r' || c == '\t')
            out += ' ';
        else
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

/// Positions of whole-word matches of `word` in normalized text.
std::vector<std::size_t> find_word(const std::string& text, const std::string& word) {
    std::vector<std::size_t> hits;
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) hits.push_back(pos);
        pos = end;
    }
    return hits;
}

const char* kHedges[] = {
    "might",   "may",      "could",  "possibly", "perhaps",      "maybe",
    "unsure",  "not sure", "unclear", "cannot",  "can't",        "can not",
    "unable",  "hard to",  "difficult to",       "uncertain",
};

/// Sentence span [begin, end) containing `pos`; sentences split on .!?
std::pair<std::size_t, std::size_t> sentence_around(const std::string& text, std::size_t pos) {
    const auto is_boundary = [](char c) { return c == '.' || c == '!' || c == '?'; };
    std::size_t begin = 0;
    for (std::size_t i = pos; i-- > 0;) {
        if (is_boundary(text[i])) {
            begin = i + 1;
            break;
        }
    }
    std::size_t end = text.size();
    for (std::size_t i = pos; i < text.size(); ++i) {
        if (is_boundary(text[i])) {
            end = i;
            break;
        }
    }
    return {begin, end};
}

bool sentence_is_hedged(const std::string& text, std::size_t pos) {
    const auto [begin, end] = sentence_around(text, pos);
    const std::string sentence = text.substr(begin, end - begin);
    for (const char* hedge : kHedges) {
        for (std::size_t hit : find_word(sentence, hedge)) {
            (void)hit;
            return true;
        }
    }
    return false;
}

struct Mention {
    std::size_t pos;
    bool hedged;
};

}  // namespace

ViscosityClass parse_viscosity(const std::string& text) {
    const std::string t = normalize(text);

    struct Pattern {
        const char* phrase;
        ViscosityClass cls;
    };
    // Longer mixed phrases first so their words are consumed before the
    // single-word patterns run.
    static const Pattern kMixed[] = {
        {"moderate to high", ViscosityClass::ModerateHigh},
        {"high to moderate", ViscosityClass::ModerateHigh},
        {"low to moderate", ViscosityClass::ModerateLow},
        {"moderate to low", ViscosityClass::ModerateLow},
        {"moderately high", ViscosityClass::ModerateHigh},
        {"moderately low", ViscosityClass::ModerateLow},
    };
    static const Pattern kSingle[] = {
        {"low", ViscosityClass::Low},
        {"moderate", ViscosityClass::Moderate},
        {"medium", ViscosityClass::Moderate},
        {"high", ViscosityClass::High},
    };

    std::vector<bool> consumed(t.size(), false);
    std::vector<std::pair<ViscosityClass, Mention>> mentions;

    for (const auto& p : kMixed) {
        for (std::size_t pos : find_word(t, p.phrase)) {
            mentions.push_back({p.cls, {pos, sentence_is_hedged(t, pos)}});
            for (std::size_t i = pos; i < pos + std::string(p.phrase).size(); ++i)
                consumed[i] = true;
        }
    }
    for (const auto& p : kSingle) {
        for (std::size_t pos : find_word(t, p.phrase)) {
            if (consumed[pos]) continue;
            mentions.push_back({p.cls, {pos, sentence_is_hedged(t, pos)}});
        }
    }

    std::vector<ViscosityClass> committed;
    for (const auto& [cls, mention] : mentions) {
        if (mention.hedged) continue;
        if (std::find(committed.begin(), committed.end(), cls) == committed.end())
            committed.push_back(cls);
    }
    if (committed.size() == 1) return committed.front();
    return ViscosityClass::Invalid;
}

std::string to_string(PairwiseDecision d) {
    switch (d) {
        case PairwiseDecision::Left: return "left";
        case PairwiseDecision::Right: return "right";
        case PairwiseDecision::Invalid: return "invalid";
    }
    return "invalid";
}

PairwiseDecision parse_pairwise(const std::string& text) {
    const std::string t = normalize(text);

    std::vector<std::pair<PairwiseDecision, Mention>> mentions;
    const auto gather = [&](const char* word, PairwiseDecision side) {
        for (std::size_t pos : find_word(t, word))
            mentions.push_back({side, {pos, sentence_is_hedged(t, pos)}});
    };
    gather("left", PairwiseDecision::Left);
    gather("first", PairwiseDecision::Left);
    gather("right", PairwiseDecision::Right);
    gather("second", PairwiseDecision::Right);

    bool has_left = false, has_right = false;
    for (const auto& [side, mention] : mentions) {
        if (mention.hedged) continue;
        (side == PairwiseDecision::Left ? has_left : has_right) = true;
    }
    if (has_left != has_right) return has_left ? PairwiseDecision::Left : PairwiseDecision::Right;
    if (!has_left && !has_right) return PairwiseDecision::Invalid;

    // Both sides mentioned: attribute the side nearest before the comparison
    // claim within its sentence.
    for (std::size_t claim : find_word(t, "more viscous")) {
        const auto [begin, end] = sentence_around(t, claim);
        const PairwiseDecision* best = nullptr;
        std::size_t best_pos = 0;
        for (const auto& [side, mention] : mentions) {
            if (mention.hedged) continue;
            if (mention.pos >= begin && mention.pos < claim &&
                (!best || mention.pos > best_pos)) {
                best = &side;
                best_pos = mention.pos;
            }
        }
        (void)end;
        if (best) return *best;
    }
    return PairwiseDecision::Invalid;
}

std::optional<Action> parse_action(const std::string& text) {
    static const std::regex pattern(R"((shake|look|finish)\s*\[([^\]]*)\])",
                                    std::regex::icase);
    std::smatch match;
    if (!std::regex_search(text, match, pattern)) return std::nullopt;

    std::string verb = match[1].str();
    std::transform(verb.begin(), verb.end(), verb.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string arg = normalize(match[2].str());

    const auto first_int = [&]() -> std::optional<int> {
        const auto digit = arg.find_first_of("0123456789");
        if (digit == std::string::npos) return std::nullopt;
        return std::stoi(arg.substr(digit));
    };

    if (verb == "look") {
        if (arg.find("scene") != std::string::npos) return Action::look_scene();
        if (const auto idx = first_int()) return Action::look_container(*idx);
        return std::nullopt;
    }
    if (verb == "shake") {
        if (const auto idx = first_int()) return Action::shake(*idx);
        return std::nullopt;
    }
    // finish
    if (const auto idx = first_int()) return Action::finish(*idx);
    return std::nullopt;
}

std::pair<std::string, std::optional<Action>> parse_react_reply(const std::string& text) {
    // Case-insensitive search for the last "action:" marker.
    const std::string lower = normalize(text);
    const auto action_pos = lower.rfind("action:");
    std::string thought = text;
    std::string action_text = text;
    if (action_pos != std::string::npos) {
        thought = text.substr(0, action_pos);
        action_text = text.substr(action_pos);
    }

    const auto thought_pos = lower.find("thought:");
    if (thought_pos != std::string::npos && thought_pos < action_pos)
        thought = text.substr(thought_pos + 8,
                              action_pos == std::string::npos ? std::string::npos
                                                              : action_pos - thought_pos - 8);

    // Trim.
    const auto begin = thought.find_first_not_of(" \t\r\n");
    const auto last = thought.find_last_not_of(" \t\r\n");
    thought = begin == std::string::npos ? "" : thought.substr(begin, last - begin + 1);

    return {thought, parse_action(action_text)};
}

}  // namespace liquidsense
