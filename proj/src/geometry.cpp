#include "alignnd/geometry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "alignnd/errors.hpp"

namespace alignnd {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;
constexpr double kMinPairDistance = 0.3;   // sanity floor, Angstrom
constexpr double kMinArmLength = 1e-8;

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Vec3 rotate_about_axis(const Vec3& v, const Vec3& axis, double angle_rad) {
    const double n = norm(axis);
    if (n < kMinArmLength) throw DataError("rotate_about_axis: zero-length axis");
    const Vec3 a = axis * (1.0 / n);
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    // Rodrigues formula.
    return v * c + cross(a, v) * s + a * (dot(a, v) * (1.0 - c));
}

Element element_from_symbol(const std::string& symbol) {
    if (symbol == "H") return Element::H;
    if (symbol == "O") return Element::O;
    if (symbol == "Cu") return Element::Cu;
    throw DataError("unknown element symbol: '" + symbol + "' (supported: H, O, Cu)");
}

const char* element_symbol(Element e) {
    switch (e) {
        case Element::H: return "H";
        case Element::O: return "O";
        case Element::Cu: return "Cu";
    }
    return "?";
}

int atomic_number(Element e) {
    switch (e) {
        case Element::H: return 1;
        case Element::O: return 8;
        case Element::Cu: return 29;
    }
    return 0;
}

Element element_from_atomic_number(int z) {
    switch (z) {
        case 1: return Element::H;
        case 8: return Element::O;
        case 29: return Element::Cu;
    }
    throw DataError("unsupported atomic number: " + std::to_string(z));
}

void AtomicStructure::validate() const {
    if (atoms.size() < 2) throw DataError("structure must contain at least 2 atoms");
    for (const auto& a : atoms) {
        if (!std::isfinite(a.pos.x) || !std::isfinite(a.pos.y) || !std::isfinite(a.pos.z)) {
            throw DataError("structure contains non-finite coordinates");
        }
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms.size(); ++j) {
            if (distance(atoms[i].pos, atoms[j].pos) <= kMinPairDistance) {
                throw DataError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                " closer than 0.3 A");
            }
        }
    }
}

AtomicStructure parse_xyz(const std::string& text) {
    std::istringstream stream(text);
    std::string line;

    if (!std::getline(stream, line)) throw DataError("XYZ: empty input");
    long declared = -1;
    try {
        std::size_t pos = 0;
        declared = std::stol(line, &pos);
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos != line.size()) throw std::invalid_argument("");
    } catch (...) {
        throw DataError("XYZ: invalid atom count line: '" + line + "'");
    }
    if (declared < 0) throw DataError("XYZ: negative atom count");

    AtomicStructure s;
    if (!std::getline(stream, s.label)) throw DataError("XYZ: missing comment line");
    if (!s.label.empty() && s.label.back() == '\r') s.label.pop_back();

    for (long i = 0; i < declared; ++i) {
        if (!std::getline(stream, line)) {
            throw DataError("XYZ: declared " + std::to_string(declared) + " atoms but found " +
                            std::to_string(i));
        }
        std::istringstream atom_line(line);
        std::string symbol;
        double x, y, z;
        if (!(atom_line >> symbol >> x >> y >> z)) {
            throw DataError("XYZ: malformed atom line: '" + line + "'");
        }
        s.atoms.push_back({element_from_symbol(symbol), {x, y, z}});
    }
    // Only trailing whitespace is allowed after the declared atoms.
    while (std::getline(stream, line)) {
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) {
            throw DataError("XYZ: unexpected content after " + std::to_string(declared) +
                            " atoms: '" + line + "'");
        }
    }
    s.validate();
    return s;
}

std::string write_xyz(const AtomicStructure& s) {
    std::ostringstream out;
    out << s.atoms.size() << "\n" << s.label << "\n";
    for (const auto& a : s.atoms) {
        out << element_symbol(a.element) << " " << format_g17(a.pos.x) << " "
            << format_g17(a.pos.y) << " " << format_g17(a.pos.z) << "\n";
    }
    return out.str();
}

AtomicStructure read_xyz_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open XYZ file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_xyz(buf.str());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_xyz_file(const AtomicStructure& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write XYZ file: " + path);
    out << write_xyz(s);
}

double bond_angle(const Vec3& a, const Vec3& center, const Vec3& b) {
    const Vec3 u = a - center;
    const Vec3 v = b - center;
    if (norm(u) < kMinArmLength || norm(v) < kMinArmLength) {
        throw DataError("bond_angle: degenerate zero-length arm");
    }
    return std::atan2(norm(cross(u, v)), dot(u, v)) * kRadToDeg;
}

double dihedral_angle(const Vec3& k, const Vec3& i, const Vec3& j, const Vec3& l) {
    const Vec3 b1 = i - k;
    const Vec3 b2 = j - i;
    const Vec3 b3 = l - j;
    const double nb1 = norm(b1), nb2 = norm(b2), nb3 = norm(b3);
    if (nb1 < kMinArmLength || nb2 < kMinArmLength || nb3 < kMinArmLength) {
        throw DataError("dihedral_angle: degenerate zero-length bond");
    }
    const Vec3 n1 = cross(b1, b2);
    const Vec3 n2 = cross(b2, b3);
    // An arm parallel to the axis leaves the torsion undefined.
    if (norm(n1) < kMinArmLength * nb1 * nb2 || norm(n2) < kMinArmLength * nb2 * nb3) {
        throw DataError("dihedral_angle: arm parallel to the central bond (degenerate dihedral)");
    }
    const Vec3 m = cross(n1, b2 * (1.0 / nb2));
    const double x = dot(n1, n2);
    const double y = dot(m, n2);
    double deg = std::atan2(y, x) * kRadToDeg;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

}  // namespace alignnd
