// Level-1 bound on CHSH next to the value of the honest qubit model.

#include <dirc/certify/certify.hpp>

#include <iomanip>
#include <iostream>

int main() {
    const dirc::Setup s = dirc::presets::construction_one();
    const auto r = dirc::tsirelson(s, 0, dirc::npa::parse_level("1"));
    std::cout << std::setprecision(10) << s.functionals[0].name() << ": upper bound " << r.upper_bound;
    if (r.honest) std::cout << ", honest " << *r.honest;
    std::cout << '\n';
}
