#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "base64_detail.hpp"
#include "liquidsense/perception.hpp"

namespace liquidsense {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
    if (const char* v = std::getenv(name); v && *v) return v;
    return fallback;
}

struct SplitUrl {
    std::string host;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw BackendUnavailable("malformed endpoint URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

RemoteLvlmBackend::RemoteLvlmBackend(LvlmConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty())
        config_.endpoint = env_or("LVLM_ENDPOINT", "");
    if (config_.api_key.empty())
        config_.api_key = env_or("LVLM_API_KEY", "");
}

std::string RemoteLvlmBackend::request_body(const Prompt& prompt) const {
    json user_content = json::array();
    user_content.push_back({{"type", "text"}, {"text", prompt.user_text}});
    for (const auto& image : prompt.images) {
        if (image.format != ImageFormat::PNG)
            throw BackendUnavailable(
                "the LVLM wire format needs raster images; render plots as PNG");
        user_content.push_back(
            {{"type", "image_url"},
             {"image_url", {{"url", "data:image/png;base64," + base64_encode(image.bytes)}}}});
    }

    json body;
    body["model"] = config_.model;
    body["temperature"] = prompt.temperature;
    body["messages"] = json::array();
    if (!prompt.system_text.empty())
        body["messages"].push_back({{"role", "system"}, {"content", prompt.system_text}});
    body["messages"].push_back({{"role", "user"}, {"content", std::move(user_content)}});
    return body.dump();
}

std::string RemoteLvlmBackend::answer(const Prompt& prompt, const SideChannel* /*side*/) {
    // Config validation happens before any network traffic.
    if (config_.api_key.empty())
        throw BackendUnavailable("no API key configured (set LVLM_API_KEY)");
    if (config_.endpoint.empty())
        throw BackendUnavailable("no endpoint configured (set LVLM_ENDPOINT)");

    const std::string body = request_body(prompt);
    const SplitUrl url = split_url(config_.endpoint);

    std::string last_error;
    double backoff_s = config_.backoff_initial_s;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff_s));
            backoff_s *= 2.0;
        }

        httplib::Client client(url.host);
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
        client.set_default_headers({{"Authorization", "Bearer " + config_.api_key}});

        const auto res = client.Post(url.path, body, "application/json");
        if (!res) {
            last_error = "endpoint unreachable: " + config_.endpoint;
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            if (transient_status(res->status)) continue;
            break;
        }
        try {
            const json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            last_error = std::string("malformed completion response: ") + e.what();
            break;
        }
    }
    throw BackendUnavailable("LVLM request failed: " + last_error);
}

}  // namespace liquidsense
