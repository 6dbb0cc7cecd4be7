#include "naesat/exact.hpp"

#include <cmath>

namespace naesat {

mpz_class factorial(unsigned long n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

mpz_class binomial(unsigned long n, unsigned long r) {
    mpz_class out;
    mpz_bin_uiui(out.get_mpz_t(), n, r);
    return out;
}

long double log_of(const mpz_class& z) {
    long exp = 0;
    double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(static_cast<long double>(mant)) + static_cast<long double>(exp) * std::log(2.0L);
}

long double log_of(const mpq_class& q) { return log_of(q.get_num()) - log_of(q.get_den()); }

long double to_ld(const mpq_class& q) {
    if (q == 0) return 0.0L;
    long double l = log_of(mpq_class(abs(q)));
    long double v = std::exp(l);
    return q < 0 ? -v : v;
}

long double pow_ld(const mpq_class& q, long double lambda) {
    if (q == 0) return 0.0L;
    return std::exp(lambda * log_of(q));
}

std::string to_string(const mpq_class& q) { return q.get_str(); }

}  // namespace naesat
