#pragma once

#include <iosfwd>
#include <string>

#include "lrcf/model.hpp"

namespace lrcf {

//! Versioned text model format:
//!   LRCF v1
//!   N F K
//!   N lines of "shift scale"
//!   one line of F mixture weights
//!   per variable, (2K+1) lines of F "re,im" entries, frequency ascending
//! Numbers use 17 significant digits, so save/load round-trips bit-exactly.
void save_model(std::ostream& out, const CpdModel& model);
void save_model(const std::string& path, const CpdModel& model);

//! Parse and re-validate every model invariant.
CpdModel load_model(std::istream& in);
CpdModel load_model(const std::string& path);

} // namespace lrcf
