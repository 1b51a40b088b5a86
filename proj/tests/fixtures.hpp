#pragma once

#include "kpo/graph.hpp"

namespace fixture {

// 2 harmful, 3 benign, 2 GO. H1, H2, B1, B2 annotate g1; B1 and B3 annotate
// g2. With default weights S(B1)=1.5, S(B2)=1.0, S(B3)=0.5 and C(g1)=5,
// C(g2)=1.
inline kpo::Graph two_go() {
  using kpo::NodeKind;
  return kpo::Graph::from_parts({{"H1", NodeKind::HarmfulProtein, "CCWCKR"},
                                 {"H2", NodeKind::HarmfulProtein, "WCCWCR"},
                                 {"B1", NodeKind::BenignProtein, "AEGLLK"},
                                 {"B2", NodeKind::BenignProtein, "ASTLEV"},
                                 {"B3", NodeKind::BenignProtein, "GDLEKA"},
                                 {"g1", NodeKind::GoTerm, "toxin activity"},
                                 {"g2", NodeKind::GoTerm, "binding"}},
                                {{"H1", "annotated_with", "g1"},
                                 {"H2", "annotated_with", "g1"},
                                 {"B1", "annotated_with", "g1"},
                                 {"B2", "annotated_with", "g1"},
                                 {"B1", "annotated_with", "g2"},
                                 {"B3", "annotated_with", "g2"}});
}

}  // namespace fixture
