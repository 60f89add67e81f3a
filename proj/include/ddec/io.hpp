#pragma once

#include "ddec/coarsen.hpp"
#include "ddec/train.hpp"

#include <iosfwd>
#include <string>

namespace ddec::io {

/// Shortest round-trip decimal form (%.17g); used everywhere a double is
/// written so identical runs produce byte-identical files.
std::string format_double(double v);

/// FNV-1a 64-bit content hash, lowercase hex.
std::string content_hash(const std::string& content);

void write_complex(std::ostream& os, const ChainComplex& c);
ChainComplex read_complex(std::istream& is);

void write_coarse(std::ostream& os, const CoarseComplex& cc);
CoarseComplex read_coarse(std::istream& is);

void write_model(std::ostream& os, const SurrogateModel& mo);
SurrogateModel read_model(std::istream& is);

/// Samples reference their coarse complex by content hash.
void write_sample(std::ostream& os, const Sample& s, int k, const std::string& complex_hash);
Sample read_sample(std::istream& is, int& k, std::string& complex_hash);

// file helpers
std::string slurp(const std::string& path);          // throws on missing file
void spit(const std::string& path, const std::string& content);

ChainComplex load_complex(const std::string& path);
CoarseComplex load_coarse(const std::string& path);
SurrogateModel load_model(const std::string& path);
Sample load_sample(const std::string& path, int& k, std::string& complex_hash);

void save_complex(const std::string& path, const ChainComplex& c);
void save_coarse(const std::string& path, const CoarseComplex& cc);
void save_model(const std::string& path, const SurrogateModel& mo);
void save_sample(const std::string& path, const Sample& s, int k, const std::string& complex_hash);

} // namespace ddec::io
