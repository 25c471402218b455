#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace alignnd {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

// Rotate v about unit axis by angle (radians), right-handed.
Vec3 rotate_about_axis(const Vec3& v, const Vec3& axis, double angle_rad);

// Supported element set. Symbol and atomic number are bijective:
// H=1, O=8, Cu=29.
enum class Element { H, O, Cu };

Element element_from_symbol(const std::string& symbol);
const char* element_symbol(Element e);
int atomic_number(Element e);
Element element_from_atomic_number(int z);

struct Atom {
    Element element;
    Vec3 pos;  // Angstrom
};

struct AtomicStructure {
    std::vector<Atom> atoms;
    std::string label;

    std::size_t size() const { return atoms.size(); }

    // Enforces the structure invariants: at least two atoms, finite
    // coordinates, all pairwise distances above 0.3 A.
    void validate() const;
};

// Standard XYZ: atom count line, free-text comment line (kept as label),
// then `symbol x y z` per atom.
AtomicStructure parse_xyz(const std::string& text);
std::string write_xyz(const AtomicStructure& s);
AtomicStructure read_xyz_file(const std::string& path);
void write_xyz_file(const AtomicStructure& s, const std::string& path);

// Angle a-center-b in degrees, range [0,180]. Uses atan2 of the
// cross/dot magnitudes so near-collinear arms stay finite.
double bond_angle(const Vec3& a, const Vec3& center, const Vec3& b);

// Torsion of bond k-i against bond j-l about the axis i->j, in degrees,
// range [0,360). The angle increases as l rotates clockwise about the
// axis when viewed from i toward j. Throws DataError when an arm is
// parallel to the axis (undefined torsion).
double dihedral_angle(const Vec3& k, const Vec3& i, const Vec3& j, const Vec3& l);

}  // namespace alignnd
