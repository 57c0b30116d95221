/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Two firms with negatively correlated assets. Prints their joint survival
// probability, then firm 2's default intensity around firm 1's default at
// t = 2.

#include <cstdio>

#include "wedge/intensity.hpp"

int main() {
    using namespace wedge;

    ModelParams p;
    p.mu = {2, 3};
    p.sigma1 = 4;
    p.sigma2 = 5;
    p.rho = -0.5;
    p.x0 = {9, 10};

    const QuadConfig q;
    const WedgeState s = build_model(p);
    for (double t : {1.0, 2.0, 5.0})
        std::printf("P(both alive at %g) = %.6f\n", t, survival_prob(t, s, q).value);

    Scenario sc;
    sc.model = p;
    sc.observations = {{0.0, 9.0, 10.0}};
    sc.defaults = {{1, 2.0}};
    sc.grid = {1.5, 3.0, 0.25};
    for (const IntensitySample& x : intensity_path(sc, sc.grid.points(), q, Firms::Second))
        std::printf("u = %.2f  lambda2 = %.6f  (%s)\n", x.u, *x.lambda2, regime_name(x.regime2.tag).c_str());
    return 0;
}
