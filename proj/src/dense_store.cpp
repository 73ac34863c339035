#include "fuseprf/dense_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "fuseprf/corpus_io.hpp"

namespace fuseprf {

namespace {

constexpr char kStoreMagic[4] = {'F', 'P', 'D', 'S'};
constexpr std::uint32_t kStoreVersion = 1;

double dot(const double* a, const double* b, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const double* a, std::size_t dim) { return std::sqrt(dot(a, a, dim)); }

}  // namespace

DenseStore::DenseStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("store dimension must be positive");
}

DenseStore DenseStore::from_vectors(std::size_t dim,
                                    const std::map<std::string, DenseVector>& vectors) {
  DenseStore store(dim);
  store.ids_.reserve(vectors.size());
  store.data_.reserve(vectors.size() * dim);
  for (const auto& [id, v] : vectors) store.add(id, v);
  return store;
}

void DenseStore::add(const std::string& id, const DenseVector& vector) {
  if (vector.size() != dim_)
    throw std::invalid_argument("vector for '" + id + "' has dimension " +
                                std::to_string(vector.size()) + ", store expects " +
                                std::to_string(dim_));
  for (double x : vector)
    if (!std::isfinite(x))
      throw std::invalid_argument("vector for '" + id + "' has non-finite entries");
  if (!lookup_.emplace(id, ids_.size()).second)
    throw std::invalid_argument("duplicate passage id '" + id + "'");
  ids_.push_back(id);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

ScoredList DenseStore::top_k(const DenseVector& query, std::size_t depth,
                             Similarity similarity) const {
  if (depth == 0) throw std::invalid_argument("depth must be positive");
  if (query.size() != dim_)
    throw std::invalid_argument("query dimension " + std::to_string(query.size()) +
                                " does not match store dimension " + std::to_string(dim_));

  double qnorm = similarity == Similarity::COSINE ? norm(query.data(), dim_) : 1.0;
  std::vector<ScoredEntry> entries;
  entries.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double* row = data_.data() + i * dim_;
    double s = dot(query.data(), row, dim_);
    if (similarity == Similarity::COSINE) {
      double denom = qnorm * norm(row, dim_);
      s = denom > 0.0 ? s / denom : 0.0;
    }
    entries.push_back(ScoredEntry{ids_[i], s});
  }
  return make_scored_list("", std::move(entries), depth);
}

std::vector<DenseVector> DenseStore::fetch_vectors(std::span<const std::string> ids) const {
  std::vector<DenseVector> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) throw std::out_of_range("no vector for passage id '" + id + "'");
    const double* row = data_.data() + it->second * dim_;
    out.emplace_back(row, row + dim_);
  }
  return out;
}

void DenseStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["format_version"] = kStoreVersion;
  meta["kind"] = "dense";
  meta["dim"] = dim_;
  meta["count"] = ids_.size();
  std::ofstream meta_out(dir / "meta.json");
  if (!meta_out) throw IoError("cannot write " + (dir / "meta.json").string());
  meta_out << meta.dump(2) << '\n';

  std::ofstream out(dir / "vectors.bin", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "vectors.bin").string());
  out.write(kStoreMagic, 4);
  auto write_raw = [&out](const auto& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  write_raw(kStoreVersion);
  write_raw(static_cast<std::uint32_t>(dim_));
  write_raw(static_cast<std::uint64_t>(ids_.size()));
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    write_raw(static_cast<std::uint32_t>(ids_[i].size()));
    out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
    out.write(reinterpret_cast<const char*>(data_.data() + i * dim_),
              static_cast<std::streamsize>(dim_ * sizeof(double)));
  }
  if (!out) throw IoError("failed writing " + (dir / "vectors.bin").string());
}

DenseStore DenseStore::load(const std::filesystem::path& dir) {
  auto path = dir / "vectors.bin";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  auto read_raw = [&in, &path](auto& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw ParseError(path.string() + ": truncated store file");
  };
  std::uint32_t version = 0, dim = 0;
  std::uint64_t count = 0;
  read_raw(version);
  read_raw(dim);
  read_raw(count);
  if (!std::equal(magic, magic + 4, kStoreMagic) || version != kStoreVersion)
    throw ParseError(path.string() + ": bad store header");
  if (dim == 0) throw ParseError(path.string() + ": zero dimension");

  DenseStore store(dim);
  store.ids_.reserve(count);
  store.data_.reserve(count * dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    read_raw(len);
    std::string id(len, '\0');
    in.read(id.data(), len);
    DenseVector v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) throw ParseError(path.string() + ": truncated store file");
    store.add(id, v);
  }
  return store;
}

}  // namespace fuseprf
