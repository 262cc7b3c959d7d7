#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "urllc/channel.hpp"

namespace urllc {

/// A stored network instance: the configuration and seed it was drawn from
/// plus the realization itself.
struct Instance {
  NetworkConfig config;
  std::uint64_t seed = 0;
  ChannelRealization realization;
};

Instance make_instance(const NetworkConfig& config, std::uint64_t seed);

/// JSON text; complex numbers are written as [re, im] pairs.
void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in);

void save_instance(const std::string& path, const Instance& instance);
Instance load_instance(const std::string& path);

}  // namespace urllc
