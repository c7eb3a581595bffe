#pragma once

#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

namespace graphplay::detail {

// POSTs `body` to base_url + path and returns the parsed JSON response.
// Transport failures and non-200 statuses throw EndpointError; an unparsable
// body throws ProtocolError.
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, int timeout_seconds);

// Bounds concurrent requests to one endpoint.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : sem_(limit < 1 ? 1 : limit) {}
  void acquire() { sem_.acquire(); }
  void release() { sem_.release(); }

 private:
  std::counting_semaphore<1024> sem_;
};

class InFlightGuard {
 public:
  explicit InFlightGuard(InFlightLimiter& l) : l_(l) { l_.acquire(); }
  ~InFlightGuard() { l_.release(); }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  InFlightLimiter& l_;
};

}  // namespace graphplay::detail
