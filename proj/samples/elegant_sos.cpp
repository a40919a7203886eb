// Prints the exact sum-of-squares identity behind 4√3 and checks it.

#include <dirc/sos/certificate.hpp>

#include <iostream>

int main() {
    const auto cert = dirc::sos::elegant_certificate();
    std::cout << dirc::sos::to_text(cert);
    return dirc::sos::verify_sos(cert).holds ? 0 : 1;
}
