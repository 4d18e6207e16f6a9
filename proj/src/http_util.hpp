#pragma once

#include <string>

namespace httplib {
class Result;
}

namespace agentjudge::detail {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url);

/// Maps a failed request to TransientBackendError (network error, 429, 5xx)
/// or GatewayError (other non-2xx). Returns normally on 2xx.
void classify_http_failure(const httplib::Result& res, const std::string& what);

}  // namespace agentjudge::detail
