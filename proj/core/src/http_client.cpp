#include "http_client.hpp"

#include <httplib.h>

#include "graphplay/error.hpp"

namespace graphplay::detail {

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, int timeout_seconds) {
  auto [origin, prefix] = split_url(base_url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  const std::string target = prefix + path;
  auto res = client.Post(target, body.dump(), "application/json");
  if (!res)
    throw EndpointError("POST " + origin + target + " failed: " +
                        httplib::to_string(res.error()));
  if (res->status != 200)
    throw EndpointError("POST " + origin + target + " returned status " +
                        std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("POST " + origin + target + ": malformed JSON response: " +
                        e.what());
  }
}

}  // namespace graphplay::detail
