#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graphplay {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Standard cosine similarity. Throws InvariantError on dimension mismatch or
// a zero vector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per text, in input order. Throws InvariantError on an empty
  // batch.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dim() const = 0;

  EmbeddingVector embed_one(const std::string& text);
};

// Hashed bag-of-words: every non-stopword token adds 1 to bucket
// fnv1a64(token) % dim, then the vector is L2-normalized. A text with no
// tokens maps to the zero vector. Pure function of the text.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 384, bool normalize = true);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  bool normalize_;
};

struct EmbedProviderConfig {
  enum class Mode { kHttpEndpoint, kDeterministicTest };
  Mode mode = Mode::kDeterministicTest;
  std::optional<std::string> endpoint_url;
  std::size_t dim = 384;
  bool normalize = true;
  int max_in_flight = 4;
  int timeout_seconds = 30;

  void validate() const;
};

// POST {endpoint}/v1/embed with {"texts":[...]}; expects {"vectors":[[...]]}.
// Results are memoized per instance.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(EmbedProviderConfig config);
  ~HttpEmbedder() override;
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  std::size_t dim() const override { return config_.dim; }

 private:
  struct Limiter;
  EmbedProviderConfig config_;
  std::unique_ptr<Limiter> limiter_;
  std::mutex memo_mu_;
  std::map<std::string, EmbeddingVector> memo_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedProviderConfig& config);

}  // namespace graphplay
