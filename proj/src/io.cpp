#include "phasealg/io.hpp"

#include <fstream>
#include <sstream>

namespace phasealg {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(std::string("cannot parse ") + what + " from '" + tok + "'");
  }
}

int parse_int(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(std::string("cannot parse ") + what + " from '" + tok + "'");
  }
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

std::string next_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!tokens_of(line).empty()) return line;
  }
  throw Error("unexpected end of file");
}

}  // namespace

void write_structure(std::ostream& os, const CrystalStructure& s) {
  os << s.dim << ' ' << s.atoms.size() << '\n';
  for (const Atom& a : s.atoms) {
    os << fmt(a.charge);
    for (int d = 0; d < s.dim; ++d) os << ' ' << fmt(a.pos[d]);
    os << '\n';
  }
}

CrystalStructure read_structure(std::istream& is) {
  auto head = tokens_of(next_line(is));
  if (head.size() != 2) throw Error("structure header must be 'D N'");
  CrystalStructure s;
  s.dim = parse_int(head[0], "dimension");
  int n = parse_int(head[1], "atom count");
  for (int k = 0; k < n; ++k) {
    auto toks = tokens_of(next_line(is));
    if (static_cast<int>(toks.size()) != s.dim + 1)
      throw Error("atom line must be 'Z x y [z]'");
    Atom a;
    a.charge = parse_double(toks[0], "charge");
    for (int d = 0; d < s.dim; ++d)
      a.pos[d] = parse_double(toks[d + 1], "coordinate");
    s.atoms.push_back(a);
  }
  s.validate();
  return s;
}

void write_patterson(std::ostream& os, const PattersonMap& p) {
  os << p.dim << ' ' << p.nbar() << '\n';
  for (const PattersonCentre& c : p.centres) {
    os << fmt(c.weight);
    for (int d = 0; d < p.dim; ++d) os << ' ' << fmt(c.delta[d]);
    os << '\n';
  }
}

PattersonMap read_patterson(std::istream& is) {
  auto head = tokens_of(next_line(is));
  if (head.size() != 2) throw Error("Patterson header must be 'D NBAR'");
  PattersonMap p;
  p.dim = parse_int(head[0], "dimension");
  int n = parse_int(head[1], "centre count");
  for (int k = 0; k < n; ++k) {
    auto toks = tokens_of(next_line(is));
    if (static_cast<int>(toks.size()) != p.dim + 1)
      throw Error("centre line must be 'NU x y [z]'");
    PattersonCentre c;
    c.weight = parse_double(toks[0], "weight");
    for (int d = 0; d < p.dim; ++d)
      c.delta[d] = parse_double(toks[d + 1], "coordinate");
    p.centres.push_back(c);
  }
  return p;
}

void write_intensities(std::ostream& os, const IntensitySet& i) {
  os << i.dim << '\n';
  for (const auto& [h, v] : i.entries) {
    for (int d = 0; d < i.dim; ++d) os << h[d] << ' ';
    os << fmt(v) << '\n';
  }
}

IntensitySet read_intensities(std::istream& is) {
  auto head = tokens_of(next_line(is));
  if (head.size() != 1) throw Error("intensity header must be 'D'");
  IntensitySet out;
  out.dim = parse_int(head[0], "dimension");
  std::string line;
  while (std::getline(is, line)) {
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (static_cast<int>(toks.size()) != out.dim + 1)
      throw Error("intensity line must be 'h k [l] I'");
    Reflection h{0, 0, 0};
    for (int d = 0; d < out.dim; ++d) h[d] = parse_int(toks[d], "index");
    out.set(h, parse_double(toks[out.dim], "intensity"));
  }
  return out;
}

void write_basic_set(std::ostream& os, const BasicSet& b) {
  for (const Reflection& h : b.refs) {
    for (int d = 0; d < b.dim; ++d) os << (d ? " " : "") << h[d];
    os << '\n';
  }
  os << "ZEROS\n";
  for (const Reflection& h : b.zeros) {
    for (int d = 0; d < b.dim; ++d) os << (d ? " " : "") << h[d];
    os << '\n';
  }
}

BasicSet read_basic_set(std::istream& is, int axis) {
  BasicSet b;
  b.axis = axis;
  b.dim = 0;
  bool in_zeros = false;
  std::string line;
  while (std::getline(is, line)) {
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks.size() == 1 && toks[0] == "ZEROS") {
      in_zeros = true;
      continue;
    }
    if (b.dim == 0) {
      if (toks.size() != 2 && toks.size() != 3)
        throw Error("basic-set line must hold 2 or 3 indices");
      b.dim = static_cast<int>(toks.size());
    } else if (static_cast<int>(toks.size()) != b.dim) {
      throw Error("inconsistent index count in basic-set file");
    }
    Reflection h{0, 0, 0};
    for (int d = 0; d < b.dim; ++d) h[d] = parse_int(toks[d], "index");
    (in_zeros ? b.zeros : b.refs).push_back(h);
  }
  if (b.refs.empty()) throw Error("basic-set file holds no reflections");
  return b;
}

namespace {
template <typename T, typename W>
void save_impl(const std::string& path, const T& value, W writer) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  writer(os, value);
}
template <typename R>
auto load_impl(const std::string& path, R reader) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return reader(is);
}
}  // namespace

void save_structure(const std::string& path, const CrystalStructure& s) {
  save_impl(path, s, [](std::ostream& os, const CrystalStructure& v) {
    write_structure(os, v);
  });
}
CrystalStructure load_structure(const std::string& path) {
  return load_impl(path, [](std::istream& is) { return read_structure(is); });
}
void save_patterson(const std::string& path, const PattersonMap& p) {
  save_impl(path, p, [](std::ostream& os, const PattersonMap& v) {
    write_patterson(os, v);
  });
}
PattersonMap load_patterson(const std::string& path) {
  return load_impl(path, [](std::istream& is) { return read_patterson(is); });
}
void save_intensities(const std::string& path, const IntensitySet& i) {
  save_impl(path, i, [](std::ostream& os, const IntensitySet& v) {
    write_intensities(os, v);
  });
}
IntensitySet load_intensities(const std::string& path) {
  return load_impl(path, [](std::istream& is) { return read_intensities(is); });
}
void save_basic_set(const std::string& path, const BasicSet& b) {
  save_impl(path, b, [](std::ostream& os, const BasicSet& v) {
    write_basic_set(os, v);
  });
}
BasicSet load_basic_set(const std::string& path, int axis) {
  return load_impl(path,
                   [axis](std::istream& is) { return read_basic_set(is, axis); });
}

}  // namespace phasealg
