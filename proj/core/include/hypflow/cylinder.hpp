#pragma once

#include <vector>

#include "hypflow/group.hpp"

namespace hypflow {

// Boundary cylinder rooted at a nonempty reduced word: on tree models, all
// boundary points whose ray from o passes through the root and stays beyond
// it. Two cylinders are disjoint iff neither root is a prefix of the other.
struct Cylinder {
  Word root;
};

// Closure of cylinders under the G-action. A translated branch is either a
// plain cylinder (edge directed away from o) or the complement of one (edge
// directed toward o).
struct BranchSet {
  enum class Type { Cyl, CoCyl };
  Type type = Type::Cyl;
  Word root;

  static BranchSet cyl(Word root) { return {Type::Cyl, std::move(root)}; }
  static BranchSet cocyl(Word root) { return {Type::CoCyl, std::move(root)}; }
  bool operator==(const BranchSet&) const = default;
};

// Finite disjoint union of branch sets.
struct BoundarySet {
  std::vector<BranchSet> parts;

  static BoundarySet cyl(Word root) {
    return BoundarySet{{BranchSet::cyl(std::move(root))}};
  }
  bool operator==(const BoundarySet&) const = default;
};

// Measurable rectangle on the double boundary: forward limit in `fwd`,
// backward limit in `bwd`. The two sets must be disjoint (the diagonal is
// removed from the double boundary).
struct Rectangle {
  BoundarySet fwd;
  BoundarySet bwd;

  static Rectangle of_cylinders(Word fwd_root, Word bwd_root) {
    return Rectangle{BoundarySet::cyl(std::move(fwd_root)),
                     BoundarySet::cyl(std::move(bwd_root))};
  }
};

void validate_cylinder(const GroupModel& model, const Cylinder& c);

// True when one root is a prefix of (or equal to) the other.
bool roots_nested(const Word& a, const Word& b);

// Throws when the pieces of each set overlap or the two sides intersect.
void validate_rectangle(const GroupModel& model, const Rectangle& r);

// g-translate of a branch set (tree models).
BranchSet translate(const GroupModel& model, const Word& g, const BranchSet& b);
BoundarySet translate(const GroupModel& model, const Word& g, const BoundarySet& s);
Rectangle translate(const GroupModel& model, const Word& g, const Rectangle& r);

// Expands a branch set into plain disjoint cylinders (tree models): the
// complement of cyl(w) is the union of the branches hanging off the path
// from o to w. The whole boundary decomposes into the depth-1 cylinders.
std::vector<Cylinder> to_cylinders(const GroupModel& model, const BranchSet& b);
std::vector<Cylinder> to_cylinders(const GroupModel& model, const BoundarySet& s);

// Canonical ray through a cylinder: the root extended letter by letter with
// the least non-cancelling letter (deterministic; rays are eventually
// constant in the last letter).
Word extend_ray(const GroupModel& model, const Word& root, int depth);

}  // namespace hypflow
