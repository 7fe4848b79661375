#include "plantroute/example_data.hpp"

namespace plantroute {

namespace {

// Twelve-node test plant. Node 10 loads and unloads; machines 12 and 11 sit
// on spurs off nodes 6 and 8. The cross-links among nodes 2..7 that form the
// waiting loops are a reconstruction, not a known layout.
constexpr std::string_view kPlant = R"(# 12-node test plant (reconstructed edge set, 20 internal transitions)
[nodes]
12

[edges]
# main route
10 -> 1
1 -> 2
2 -> 3
3 -> 4
4 -> 6
6 -> 12
12 -> 6
6 -> 7
7 -> 8
8 -> 9
9 -> 1
1 -> 10
# machine 11 spur
8 -> 11
11 -> 8
# loops over nodes 2..7
4 -> 5
5 -> 6
5 -> 2
7 -> 2
6 -> 3
5 -> 3

[machines]
11 : 3
12 : 3

[io]
load=10 unload=10
)";

constexpr std::string_view kSequences = R"(# Master path: machine 12, then machine 11, then out through node 10.
# Every transport node is doubled so a part can be shifted back to wait.
# Nodes 2..6 appear twice before machine 12: the second pass is the
# circulation loop 6 -> 7 -> 2 -> 3 -> 4 -> 5 -> 6.
[sequence 1]
10:12 10:12 1:12 1:12 2:12 2:12 3:12 3:12
4:12 4:12 5:12 5:12 6:12 6:12 7:12 7:12
2:12 2:12 3:12 3:12 4:12 4:12 5:12 5:12
6:12 6:12
12:12 12:12 12:12 12:12 12:11
6:11 6:11 7:11 7:11 8:11 8:11
11:11 11:11 11:11 11:11 11:0
8:0 8:0 9:0 9:0 1:0 1:0 10:0
)";

}  // namespace

std::string_view example_plant_config() { return kPlant; }
std::string_view example_sequences_config() { return kSequences; }

}  // namespace plantroute
