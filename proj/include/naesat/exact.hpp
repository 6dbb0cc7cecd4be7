#pragma once
#include <gmpxx.h>

#include <string>

namespace naesat {

mpz_class factorial(unsigned long n);
mpz_class binomial(unsigned long n, unsigned long r);
long double log_of(const mpz_class& z);
long double log_of(const mpq_class& q);
long double to_ld(const mpq_class& q);
// q^lambda for q >= 0 as long double; 0^lambda = 0
long double pow_ld(const mpq_class& q, long double lambda);
std::string to_string(const mpq_class& q);

}  // namespace naesat
