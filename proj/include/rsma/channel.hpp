#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rsma {

/// K single-antenna users, each with an N-dimensional complex channel h_k.
/// Channels are noise-normalized (unit noise power). Immutable after
/// construction.
class ChannelSet {
 public:
  /// Throws std::invalid_argument on empty input, mismatched lengths or an
  /// all-zero vector.
  explicit ChannelSet(std::vector<Eigen::VectorXcd> vectors);

  int num_antennas() const { return num_antennas_; }
  int num_users() const { return static_cast<int>(vectors_.size()); }
  const Eigen::VectorXcd& operator[](int k) const { return vectors_.at(static_cast<std::size_t>(k)); }
  const std::vector<Eigen::VectorXcd>& vectors() const { return vectors_; }

  /// max_k ||h_k||^2
  double max_gain() const;

  bool operator==(const ChannelSet& other) const;

 private:
  int num_antennas_ = 0;
  std::vector<Eigen::VectorXcd> vectors_;
};

/// h_1 = [1 ... 1], h_2 = [1, e^{j theta}, ..., e^{j (N-1) theta}].
ChannelSet geometric_pair(int num_antennas, double theta);

/// I.i.d. CN(0, 1) entries. A pure function of (N, K, seed); an all-zero
/// draw (probability zero, but possible in floating point) is redrawn.
ChannelSet rayleigh(int num_antennas, int num_users, std::uint64_t seed);

/// Squared Euclidean norm.
double channel_gain(const Eigen::VectorXcd& h);

/// JSON text: array of users, each an array of [re, im] pairs. Doubles are
/// printed with round-trip precision so that load(dump(H)) == H exactly.
std::string channels_to_json(const ChannelSet& channels);
ChannelSet channels_from_json(const std::string& text);

}  // namespace rsma
