// Text codecs for the structure, Patterson, intensity and basic-set
// files. All floating-point output uses 17 significant digits so that
// parse(serialize(x)) round-trips exactly.

#ifndef PHASEALG_IO_HPP_
#define PHASEALG_IO_HPP_

#include <iosfwd>
#include <string>

#include "basis_search.hpp"
#include "types.hpp"

namespace phasealg {

void write_structure(std::ostream& os, const CrystalStructure& s);
CrystalStructure read_structure(std::istream& is);

void write_patterson(std::ostream& os, const PattersonMap& p);
PattersonMap read_patterson(std::istream& is);

void write_intensities(std::ostream& os, const IntensitySet& i);
IntensitySet read_intensities(std::istream& is);

void write_basic_set(std::ostream& os, const BasicSet& b);
BasicSet read_basic_set(std::istream& is, int axis = 0);

// File wrappers; throw Error on open/parse failure.
void save_structure(const std::string& path, const CrystalStructure& s);
CrystalStructure load_structure(const std::string& path);
void save_patterson(const std::string& path, const PattersonMap& p);
PattersonMap load_patterson(const std::string& path);
void save_intensities(const std::string& path, const IntensitySet& i);
IntensitySet load_intensities(const std::string& path);
void save_basic_set(const std::string& path, const BasicSet& b);
BasicSet load_basic_set(const std::string& path, int axis = 0);

}  // namespace phasealg

#endif
