#pragma once

#include <json.hpp>
#include <string>

#include "aromip/instance.hpp"
#include "aromip/oracle.hpp"

namespace aromip {

// Instance schema: top-level keys first_level / omega / third_level mirroring
// the in-memory types; matrices as [row, col, value] triplets; infinities as
// the strings "inf" / "-inf".
nlohmann::json instance_to_json(const WcaroInstance& inst);
WcaroInstance instance_from_json(const nlohmann::json& j);

// File wrappers; throw ParseError with the path on any failure.
WcaroInstance load_instance(const std::string& path);
void save_instance(const WcaroInstance& inst, const std::string& path);

nlohmann::json solution_to_json(const MipSolution& sol);
nlohmann::json cert_to_json(const CertReport& rep);

}  // namespace aromip
