#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fuseprf/types.hpp"

namespace fuseprf {

enum class Similarity { DOT, COSINE };

// Immutable-after-build store of fixed-dimension passage vectors with exact
// top-k retrieval. Scores accumulate in 64-bit; no approximate search.
class DenseStore {
 public:
  explicit DenseStore(std::size_t dim);

  static DenseStore from_vectors(std::size_t dim,
                                 const std::map<std::string, DenseVector>& vectors);

  void add(const std::string& id, const DenseVector& vector);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(const std::string& id) const { return lookup_.count(id) > 0; }

  // Exact top-`depth` by inner product (cosine behind the flag, never the
  // default); every passage is eligible, negative scores included.
  // Ties broken by ascending passage id.
  ScoredList top_k(const DenseVector& query, std::size_t depth,
                   Similarity similarity = Similarity::DOT) const;

  // Vectors in input-id order; throws naming the first missing id.
  std::vector<DenseVector> fetch_vectors(std::span<const std::string> ids) const;

  // Binary snapshot: <dir>/meta.json + <dir>/vectors.bin with a
  // magic/version/dim/count header. Round-trips exactly.
  void save(const std::filesystem::path& dir) const;
  static DenseStore load(const std::filesystem::path& dir);

  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;  // row-major, ids_[i] at data_[i * dim_]
  std::unordered_map<std::string, std::size_t> lookup_;
};

}  // namespace fuseprf
