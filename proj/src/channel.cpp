#include "rsma/channel.hpp"

#include "rsma/rng.hpp"

#include <json.hpp>

#include <complex>
#include <stdexcept>

namespace rsma {

ChannelSet::ChannelSet(std::vector<Eigen::VectorXcd> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw std::invalid_argument("ChannelSet: at least one user is required");
  num_antennas_ = static_cast<int>(vectors_.front().size());
  if (num_antennas_ < 1) throw std::invalid_argument("ChannelSet: at least one antenna is required");
  for (const auto& h : vectors_) {
    if (h.size() != num_antennas_) {
      throw std::invalid_argument("ChannelSet: channel vectors must share one dimension");
    }
    if (channel_gain(h) == 0.0) throw std::invalid_argument("ChannelSet: all-zero channel vector");
    if (!h.allFinite()) throw std::invalid_argument("ChannelSet: non-finite channel entry");
  }
}

double ChannelSet::max_gain() const {
  double best = 0.0;
  for (const auto& h : vectors_) best = std::max(best, channel_gain(h));
  return best;
}

bool ChannelSet::operator==(const ChannelSet& other) const {
  if (num_antennas_ != other.num_antennas_ || vectors_.size() != other.vectors_.size()) return false;
  for (std::size_t k = 0; k < vectors_.size(); ++k) {
    if (vectors_[k] != other.vectors_[k]) return false;
  }
  return true;
}

ChannelSet geometric_pair(int num_antennas, double theta) {
  if (num_antennas < 1) throw std::invalid_argument("geometric_pair: num_antennas must be >= 1");
  Eigen::VectorXcd h1 = Eigen::VectorXcd::Ones(num_antennas);
  Eigen::VectorXcd h2(num_antennas);
  for (int n = 0; n < num_antennas; ++n) h2[n] = std::polar(1.0, theta * n);
  return ChannelSet({std::move(h1), std::move(h2)});
}

ChannelSet rayleigh(int num_antennas, int num_users, std::uint64_t seed) {
  if (num_antennas < 1 || num_users < 1) {
    throw std::invalid_argument("rayleigh: num_antennas and num_users must be >= 1");
  }
  RandomStream rng(seed, 0, Stream::kChannel);
  std::vector<Eigen::VectorXcd> vectors;
  vectors.reserve(static_cast<std::size_t>(num_users));
  for (int k = 0; k < num_users; ++k) {
    Eigen::VectorXcd h(num_antennas);
    do {
      for (int n = 0; n < num_antennas; ++n) h[n] = rng.complex_normal();
    } while (channel_gain(h) == 0.0);
    vectors.push_back(std::move(h));
  }
  return ChannelSet(std::move(vectors));
}

double channel_gain(const Eigen::VectorXcd& h) {
  if (h.size() == 0) throw std::invalid_argument("channel_gain: empty vector");
  return h.squaredNorm();
}

std::string channels_to_json(const ChannelSet& channels) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& h : channels.vectors()) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index n = 0; n < h.size(); ++n) entries.push_back({h[n].real(), h[n].imag()});
    users.push_back(std::move(entries));
  }
  return users.dump();
}

ChannelSet channels_from_json(const std::string& text) {
  const auto users = nlohmann::json::parse(text);
  if (!users.is_array()) throw std::invalid_argument("channels JSON: expected an array of users");
  std::vector<Eigen::VectorXcd> vectors;
  for (const auto& entries : users) {
    if (!entries.is_array()) throw std::invalid_argument("channels JSON: user entry must be an array");
    Eigen::VectorXcd h(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const auto& pair = entries[n];
      if (!pair.is_array() || pair.size() != 2) {
        throw std::invalid_argument("channels JSON: each entry must be [re, im]");
      }
      h[static_cast<Eigen::Index>(n)] = {pair[0].get<double>(), pair[1].get<double>()};
    }
    vectors.push_back(std::move(h));
  }
  return ChannelSet(std::move(vectors));
}

}  // namespace rsma
