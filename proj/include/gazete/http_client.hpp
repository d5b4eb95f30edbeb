// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "gazete/synthesis.hpp"

namespace gazete::synthesis {

// Chat-completion style rewrite provider. Sends the rendered prompt as the
// system message and the article body as the user message; expects the
// rewritten text in choices[0].message.content.
class HttpRewriteClient : public RewriteClient {
 public:
  struct Options {
    std::string endpoint;      // e.g. http://host:port/v1/chat/completions
    std::string model;         // opaque provider model string
    std::string api_key;       // sent as "Authorization: Bearer ..." when set
    int timeout_seconds = 60;
  };

  explicit HttpRewriteClient(Options options);

  std::string rewrite(const std::string& prompt, const std::string& article_body) override;
  std::map<std::string, std::string> metadata() const override;

 private:
  Options options_;
  std::string scheme_host_port_;
  std::string path_;
};

}  // namespace gazete::synthesis
