#pragma once

#include <string>

#include "aisbn/network_io.hpp"

#ifndef AISBN_FIXTURE_DIR
#error "AISBN_FIXTURE_DIR must be defined"
#endif

inline std::string fixture_path(const std::string& name) { return std::string(AISBN_FIXTURE_DIR) + "/" + name; }

inline aisbn::BayesianNetwork load_fixture(const std::string& name) {
  return aisbn::load_network(fixture_path(name));
}
