// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include "gazete/http_client.hpp"

#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace gazete::synthesis {

using json = nlohmann::json;

HttpRewriteClient::HttpRewriteClient(Options options) : options_(std::move(options)) {
  const auto& url = options_.endpoint;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("rewrite endpoint must include a scheme: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
    path_ = "/";
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.rfind("https://", 0) == 0) {
    throw std::invalid_argument("this build lacks TLS support; use an http:// endpoint");
  }
#endif
}

std::map<std::string, std::string> HttpRewriteClient::metadata() const {
  return {{"provider", "http"}, {"model", options_.model}};
}

std::string HttpRewriteClient::rewrite(const std::string& prompt,
                                       const std::string& article_body) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);

  json request;
  request["model"] = options_.model;
  request["messages"] = json::array({
      json{{"role", "system"}, {"content", prompt}},
      json{{"role", "user"}, {"content", article_body}},
  });

  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  const auto response = client.Post(path_, headers, request.dump(), "application/json");
  if (!response) {
    throw ProviderError("rewrite endpoint unreachable: " + scheme_host_port_);
  }
  if (response->status != 200) {
    throw ProviderError("rewrite endpoint returned HTTP " + std::to_string(response->status));
  }

  const json body = json::parse(response->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) {
    throw ProviderError("rewrite endpoint returned invalid JSON");
  }
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProviderError("rewrite response missing choices[0].message.content");
  }
}

}  // namespace gazete::synthesis
