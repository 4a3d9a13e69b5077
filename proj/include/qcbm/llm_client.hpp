// Copyright 2026 The QCBM Search Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Chat-completion proposer. The endpoint, credential and model name come
 * from the environment; decoding temperature is left at the provider
 * default. Every exchange is appended to a JSON-lines log.
 */
#pragma once

#include "common.hpp"
#include "io.hpp"
#include "search.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace qcbm {

/// Transport or protocol failure talking to the endpoint.
class LlmError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char *kEnvEndpoint = "QCBM_LLM_ENDPOINT";
inline constexpr const char *kEnvApiKey = "QCBM_LLM_API_KEY";
inline constexpr const char *kEnvModel = "QCBM_LLM_MODEL";

struct LlmConfig {
    std::string endpoint; ///< full URL of the chat-completions route
    std::string apiKey;
    std::string model;
    int timeoutSeconds = 120;
    int maxRetries = 2; ///< extra attempts after a retryable failure
    int backoffMillis = 1000;
    std::string systemMessage = "You design parameterized quantum circuits. Answer with a circuit document only.";
    std::filesystem::path logPath; ///< empty disables logging

    /// Reads endpoint, key and model; throws ConfigError naming what is missing.
    [[nodiscard]] static LlmConfig fromEnv(const std::function<const char *(const char *)> &getenv = ::getenv) {
        LlmConfig cfg;
        std::string missing;
        auto read = [&](const char *name, std::string &into) {
            const char *v = getenv(name);
            if (v == nullptr || *v == '\0') {
                missing += missing.empty() ? name : std::string(", ") + name;
            } else {
                into = v;
            }
        };
        read(kEnvEndpoint, cfg.endpoint);
        read(kEnvApiKey, cfg.apiKey);
        read(kEnvModel, cfg.model);
        if (!missing.empty()) {
            throw ConfigError("LLM proposer needs environment variable(s): " + missing);
        }
        return cfg;
    }
};

namespace detail {

struct UrlParts {
    std::string base; ///< scheme://host[:port]
    std::string path;
};

inline UrlParts splitUrl(const std::string &url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("endpoint is not an absolute URL: " + url);
    }
    const std::string proto = url.substr(0, scheme);
    if (proto != "http" && proto != "https") {
        throw ConfigError("unsupported endpoint scheme: " + proto);
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (proto == "https") {
        throw ConfigError("https endpoint requested but this build lacks TLS support");
    }
#endif
    const auto slash = url.find('/', scheme + 3);
    UrlParts parts;
    parts.base = url.substr(0, slash);
    parts.path = slash == std::string::npos ? "/" : url.substr(slash);
    if (parts.base.size() <= scheme + 3) {
        throw ConfigError("endpoint has no host: " + url);
    }
    return parts;
}

inline bool retryableStatus(int status) { return status == 408 || status == 429 || status >= 500; }

inline std::string utcTimestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Extracts choices[0].message.content from a chat-completion response body.
[[nodiscard]] inline std::string completionText(const std::string &body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw LlmError("response body is not JSON");
    }
    const auto *choices = j.contains("choices") ? &j["choices"] : nullptr;
    if (choices == nullptr || !choices->is_array() || choices->empty()) {
        throw LlmError("response has no choices");
    }
    const auto &msg = (*choices)[0];
    if (!msg.contains("message") || !msg["message"].contains("content") || !msg["message"]["content"].is_string()) {
        throw LlmError("response choice lacks message.content");
    }
    return msg["message"]["content"].get<std::string>();
}

class LlmProposer : public Proposer {
  public:
    explicit LlmProposer(LlmConfig cfg) : cfg_(std::move(cfg)), url_(detail::splitUrl(cfg_.endpoint)) {}

    std::string propose(const std::string &prompt, const ProposalContext &ctx) override {
        nlohmann::ordered_json request;
        request["model"] = cfg_.model;
        request["messages"] = nlohmann::ordered_json::array(
            {{{"role", "system"}, {"content", cfg_.systemMessage}}, {{"role", "user"}, {"content", prompt}}});
        const std::string body = request.dump();

        httplib::Client client(url_.base);
        client.set_connection_timeout(cfg_.timeoutSeconds, 0);
        client.set_read_timeout(cfg_.timeoutSeconds, 0);
        client.set_write_timeout(cfg_.timeoutSeconds, 0);
        const httplib::Headers headers{{"Authorization", "Bearer " + cfg_.apiKey}};

        std::string lastError;
        for (int attempt = 0; attempt <= cfg_.maxRetries; ++attempt) {
            if (attempt > 0 && cfg_.backoffMillis > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoffMillis * attempt));
            }
            auto res = client.Post(url_.path, headers, body, "application/json");
            if (!res) {
                lastError = "transport error: " + httplib::to_string(res.error());
                log(ctx, attempt, request, std::nullopt, lastError);
                continue;
            }
            if (res->status != 200) {
                lastError = "HTTP " + std::to_string(res->status);
                log(ctx, attempt, request, res->status, lastError + ": " + res->body);
                if (detail::retryableStatus(res->status)) {
                    continue;
                }
                throw LlmError(lastError);
            }
            log(ctx, attempt, request, res->status, res->body);
            return completionText(res->body);
        }
        throw LlmError("LLM request failed after " + std::to_string(cfg_.maxRetries + 1) + " attempt(s): " +
                       lastError);
    }

    [[nodiscard]] std::string name() const override { return "llm"; }
    [[nodiscard]] const LlmConfig &config() const { return cfg_; }

  private:
    void log(const ProposalContext &ctx, int attempt, const nlohmann::ordered_json &request, std::optional<int> status,
             const std::string &response) {
        if (cfg_.logPath.empty()) {
            return;
        }
        nlohmann::ordered_json line;
        line["time"] = detail::utcTimestamp();
        line["round"] = ctx.round;
        line["proposal_attempt"] = ctx.attempt;
        line["http_attempt"] = attempt;
        line["request"] = request;
        line["status"] = status ? nlohmann::ordered_json(*status) : nlohmann::ordered_json(nullptr);
        line["response"] = response;
        const std::lock_guard<std::mutex> lock(logMutex_);
        if (cfg_.logPath.has_parent_path()) {
            std::filesystem::create_directories(cfg_.logPath.parent_path());
        }
        std::ofstream out(cfg_.logPath, std::ios::app | std::ios::binary);
        out << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }

    LlmConfig cfg_;
    detail::UrlParts url_;
    std::mutex logMutex_;
};

} // namespace qcbm
