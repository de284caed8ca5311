#include <fstream>
#include <sstream>

#include "liquidsense/perception.hpp"

namespace liquidsense {

std::string to_string(PromptVariant v) {
    return v == PromptVariant::Plain ? "plain" : "knowledge";
}

PromptVariant prompt_variant_from_string(const std::string& s) {
    if (s == "plain") return PromptVariant::Plain;
    if (s == "knowledge" || s == "knowledge-enhanced" || s == "enhanced")
        return PromptVariant::KnowledgeEnhanced;
    throw Error("unknown prompt variant: " + s);
}

// ---------------------------------------------------------------------------
// Template engine
// ---------------------------------------------------------------------------

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            const auto close = text.find('}', i);
            if (close == std::string::npos)
                throw MalformedTemplate("unterminated placeholder at offset " +
                                        std::to_string(i));
            const std::string key = text.substr(i + 1, close - i - 1);
            const auto it = values.find(key);
            if (it == values.end())
                throw MalformedTemplate("unresolved placeholder {" + key + "}");
            out += it->second;
            i = close + 1;
        } else {
            out += text[i++];
        }
    }
    return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    if (!std::filesystem::is_directory(dir))
        throw MalformedTemplate("prompt template directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        // Templates end without a trailing newline in prompts.
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        lib.templates_[entry.path().stem().string()] = std::move(text);
    }
    if (lib.templates_.empty())
        throw MalformedTemplate("no *.txt templates in " + dir.string());
    return lib;
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end())
        throw MalformedTemplate("no template named '" + name + "'");
    return it->second;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& values) const {
    return render_template(raw(name), values);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {

std::string knowledge_block_for(PromptVariant variant, const PromptLibrary& lib) {
    if (variant == PromptVariant::Plain) return "";
    return "\n" + lib.raw("knowledge_block");
}

std::string action_context_block(const std::string& action_context) {
    if (action_context.empty()) return "";
    return "Action taken: " + action_context + ".\n";
}

}  // namespace

Prompt build_haptic_prompt(const std::string& action_context, const PlotImage& plot,
                           PromptVariant variant, const PromptLibrary& lib) {
    if (plot.bytes.empty()) throw EmptySignal("haptic prompt needs a non-empty plot");
    Prompt prompt;
    prompt.system_text = lib.raw("system");
    prompt.user_text = lib.render("haptic_user",
                                  {{"action_context", action_context_block(action_context)},
                                   {"knowledge_block", knowledge_block_for(variant, lib)}});
    prompt.images.push_back(plot);
    return prompt;
}

Prompt build_pairwise_prompt(const PlotImage& pair_plot, PromptVariant variant,
                             const PromptLibrary& lib) {
    if (pair_plot.bytes.empty()) throw EmptySignal("pairwise prompt needs a non-empty plot");
    Prompt prompt;
    prompt.system_text = lib.raw("system");
    prompt.user_text = lib.render(
        "pairwise_user", {{"knowledge_block", knowledge_block_for(variant, lib)}});
    prompt.images.push_back(pair_plot);
    return prompt;
}

Prompt build_scene_prompt(const PlotImage& annotated, const PromptLibrary& lib) {
    if (annotated.bytes.empty()) throw EmptySignal("scene prompt needs a non-empty image");
    Prompt prompt;
    prompt.system_text = lib.raw("system");
    prompt.user_text = lib.raw("scene_user");
    prompt.images.push_back(annotated);
    return prompt;
}

Prompt build_container_prompt(const PlotImage& cropped, const PromptLibrary& lib) {
    if (cropped.bytes.empty()) throw EmptySignal("container prompt needs a non-empty image");
    Prompt prompt;
    prompt.system_text = lib.raw("system");
    prompt.user_text = lib.raw("container_user");
    prompt.images.push_back(cropped);
    return prompt;
}

Prompt build_react_prompt(const ReactQuery& query, const PromptLibrary& lib) {
    std::string actions;
    for (std::size_t i = 0; i < query.allowed_actions.size(); ++i) {
        if (i) actions += ", ";
        actions += query.allowed_actions[i];
    }
    std::string example;
    if (!query.example.empty()) example = "Example:\n" + query.example + "\n";
    const std::string context =
        query.serialized_context.empty() ? "(no interaction yet)\n" : query.serialized_context;

    Prompt prompt;
    prompt.system_text = lib.raw("system");
    prompt.user_text = lib.render("react_user", {{"question", query.question},
                                                 {"actions", actions},
                                                 {"example", example},
                                                 {"context", context}});
    return prompt;
}

}  // namespace liquidsense
