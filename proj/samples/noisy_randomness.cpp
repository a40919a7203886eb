// Certified bits from Bob's tetrahedral POVM as white noise is mixed in.

#include <dirc/certify/certify.hpp>

#include <iomanip>
#include <iostream>

int main() {
    const dirc::Setup s = dirc::presets::construction_one();
    const auto curve = dirc::visibility_sweep(s, s.default_target, dirc::npa::parse_level("1+AB"), dirc::linear_grid(0.9, 1.0, 5),
                                              dirc::Mode::behavior);
    std::cout << "v       bits\n" << std::fixed;
    for (const auto& p : curve) std::cout << std::setprecision(3) << p.visibility << "   " << std::setprecision(4) << dirc::truncate_bits(p.bits()) << '\n';
}
