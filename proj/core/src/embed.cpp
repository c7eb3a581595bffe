#include "graphplay/embed.hpp"

#include <algorithm>
#include <cmath>

#include "graphplay/error.hpp"
#include "graphplay/hash.hpp"
#include "graphplay/text.hpp"
#include "http_client.hpp"

namespace graphplay {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double x : values) s += x * x;
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim())
    throw InvariantError("cosine: dimension mismatch (" +
                         std::to_string(u.dim()) + " vs " +
                         std::to_string(v.dim()) + ")");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) throw InvariantError("cosine: zero vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

EmbeddingVector Embedder::embed_one(const std::string& text) {
  std::vector<std::string> one{text};
  return embed(one).front();
}

HashingEmbedder::HashingEmbedder(std::size_t dim, bool normalize)
    : dim_(dim), normalize_(normalize) {
  if (dim_ == 0) throw InvariantError("embedding dim must be positive");
}

std::vector<EmbeddingVector> HashingEmbedder::embed(
    std::span<const std::string> texts) {
  if (texts.empty()) throw InvariantError("embed: empty batch");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    EmbeddingVector v{std::vector<double>(dim_, 0.0)};
    for (const auto& tok : text::tokenize(t)) {
      if (text::is_stopword(tok)) continue;
      v.values[fnv1a64(tok) % dim_] += 1.0;
    }
    if (normalize_) {
      double n = v.norm();
      if (n > 0.0)
        for (double& x : v.values) x /= n;
    }
    out.push_back(std::move(v));
  }
  return out;
}

void EmbedProviderConfig::validate() const {
  if (mode == Mode::kHttpEndpoint && (!endpoint_url || endpoint_url->empty()))
    throw ConfigError("embedder: http mode requires endpoint_url");
  if (dim == 0) throw ConfigError("embedder: dim must be positive");
}

struct HttpEmbedder::Limiter {
  explicit Limiter(int n) : limiter(n) {}
  detail::InFlightLimiter limiter;
};

HttpEmbedder::HttpEmbedder(EmbedProviderConfig config)
    : config_(std::move(config)),
      limiter_(std::make_unique<Limiter>(config_.max_in_flight)) {
  config_.validate();
}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<EmbeddingVector> HttpEmbedder::embed(
    std::span<const std::string> texts) {
  if (texts.empty()) throw InvariantError("embed: empty batch");
  std::vector<std::string> missing;
  {
    std::lock_guard lock(memo_mu_);
    for (const auto& t : texts)
      if (!memo_.count(t)) missing.push_back(t);
  }
  if (!missing.empty()) {
    nlohmann::json response;
    {
      detail::InFlightGuard guard(limiter_->limiter);
      response = detail::post_json(*config_.endpoint_url, "/v1/embed",
                                   {{"texts", missing}}, config_.timeout_seconds);
    }
    auto it = response.find("vectors");
    if (it == response.end() || !it->is_array() || it->size() != missing.size())
      throw ProtocolError("/v1/embed: expected 'vectors' with one entry per text");
    std::lock_guard lock(memo_mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      const auto& row = (*it)[i];
      if (!row.is_array() || row.size() != config_.dim)
        throw ProtocolError("/v1/embed: vector " + std::to_string(i) +
                            " has wrong dimension");
      EmbeddingVector v;
      v.values.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw ProtocolError("/v1/embed: non-numeric entry");
        v.values.push_back(x.get<double>());
        if (!std::isfinite(v.values.back()))
          throw ProtocolError("/v1/embed: non-finite entry");
      }
      if (config_.normalize) {
        double n = v.norm();
        if (n > 0.0)
          for (double& x : v.values) x /= n;
      }
      memo_.emplace(missing[i], std::move(v));
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(memo_mu_);
  for (const auto& t : texts) out.push_back(memo_.at(t));
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedProviderConfig& config) {
  config.validate();
  if (config.mode == EmbedProviderConfig::Mode::kHttpEndpoint)
    return std::make_unique<HttpEmbedder>(config);
  return std::make_unique<HashingEmbedder>(config.dim, config.normalize);
}

}  // namespace graphplay
