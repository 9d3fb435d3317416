#ifndef MANYARM_H
#define MANYARM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ManyarmStatus_Ok = 0,
  ManyarmStatus_NullPointer = 1,
  ManyarmStatus_InvalidArgument = 2,
  ManyarmStatus_DuplicateArm = 3,
  ManyarmStatus_MissingArm = 4,
  ManyarmStatus_EmptyIndex = 5,
  ManyarmStatus_OutOfRange = 6,
  ManyarmStatus_Unsupported = 7,
  ManyarmStatus_Runtime = 8,
  ManyarmStatus_Panic = 9,
} ManyarmStatus;

typedef enum {
  ManyarmDist_Bernoulli = 0,
  ManyarmDist_Beta = 1,
  ManyarmDist_Pareto = 2,
  ManyarmDist_Poly = 3,
} ManyarmDist;

typedef enum {
  ManyarmPolicy_Ose = 0,
  ManyarmPolicy_Prose = 1,
  ManyarmPolicy_Ucb = 2,
  ManyarmPolicy_Bsh = 3,
} ManyarmPolicy;

/**
 * Incremental LCB-ranked scope index.
 */
typedef struct ManyarmIndex ManyarmIndex;

/**
 * Rank complexity tables for one reservoir.
 */
typedef struct ManyarmTheory ManyarmTheory;

/**
 * One policy playing against one seeded reservoir.
 */
typedef struct ManyarmTrial ManyarmTrial;

/**
 * Reservoir description. `alpha` is used by beta, pareto and poly; `u` and
 * `eta0` by bernoulli; `levels` by poly.
 */
typedef struct {
  ManyarmDist dist;
  double alpha;
  double u;
  double eta0;
  uint32_t levels;
} ManyarmSpec;

/**
 * Policy parameters. `delta > 0` selects the theoretical schedule and
 * ignores `beta`.
 */
typedef struct {
  ManyarmPolicy kind;
  double beta;
  double delta;
  double gamma_scope;
} ManyarmPolicyConfig;

/**
 * Outcome of one trial step.
 */
typedef struct {
  uint64_t t;
  uint32_t pulled;
  uint32_t recommended;
  double pulled_mean;
  double recommended_mean;
  double recommended_rank;
} ManyarmStepResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *manyarm_status_message(ManyarmStatus status);

/**
 * Creates an empty index with scope exponent `gamma` (>= 1, or infinity).
 *
 * # Safety
 * `out` must be valid for writes.
 */
ManyarmStatus manyarm_index_new(double gamma, ManyarmIndex **out);

/**
 * # Safety
 * `index` must be null or a handle from [`manyarm_index_new`] not yet freed.
 */
void manyarm_index_free(ManyarmIndex *index);

/**
 * Recomputes the scope boundaries for time `t >= 1`.
 *
 * # Safety
 * `index` must be a live handle.
 */
ManyarmStatus manyarm_index_set_time(ManyarmIndex *index, uint64_t t);

/**
 * Adds an untouched arm (bounds -inf, +inf).
 *
 * # Safety
 * `index` must be a live handle.
 */
ManyarmStatus manyarm_index_insert(ManyarmIndex *index, uint32_t arm_index);

/**
 * Replaces the bounds of an indexed arm.
 *
 * # Safety
 * `index` must be a live handle.
 */
ManyarmStatus manyarm_index_record(ManyarmIndex *index, uint32_t arm_index, double lcb, double ucb);

/**
 * Arm with the largest UCB among the `Z_level` best arms by LCB.
 *
 * # Safety
 * `index` must be a live handle and `out` valid for writes.
 */
ManyarmStatus manyarm_index_max_ucb_in_scope(const ManyarmIndex *index,
                                             size_t level,
                                             uint32_t *out);

/**
 * Arm with the largest LCB.
 *
 * # Safety
 * `index` must be a live handle and `out` valid for writes.
 */
ManyarmStatus manyarm_index_best_lcb(const ManyarmIndex *index, uint32_t *out);

/**
 * Number of indexed arms and number of scope levels.
 *
 * # Safety
 * `index` must be a live handle; either out pointer may be null.
 */
ManyarmStatus manyarm_index_size(const ManyarmIndex *index, size_t *arms, size_t *levels);

/**
 * Creates a trial: `policy` against a reservoir of `arms` arms (0 for an
 * unbounded supply) with noise level `zeta`.
 *
 * # Safety
 * `spec` and `policy` must be readable and `out` valid for writes.
 */
ManyarmStatus manyarm_trial_new(const ManyarmSpec *spec,
                                uint32_t arms,
                                const ManyarmPolicyConfig *policy,
                                double zeta,
                                uint64_t reservoir_seed,
                                uint64_t policy_seed,
                                ManyarmTrial **out);

/**
 * # Safety
 * `trial` must be null or a handle from [`manyarm_trial_new`] not yet freed.
 */
void manyarm_trial_free(ManyarmTrial *trial);

/**
 * Plays the next time step.
 *
 * # Safety
 * `trial` must be a live handle and `out` valid for writes.
 */
ManyarmStatus manyarm_trial_step(ManyarmTrial *trial, ManyarmStepResult *out);

/**
 * Builds the complexity tables for `spec` at noise `zeta` and factor `psi`.
 *
 * # Safety
 * `spec` must be readable and `out` valid for writes.
 */
ManyarmStatus manyarm_theory_new(const ManyarmSpec *spec,
                                 double zeta,
                                 double psi,
                                 ManyarmTheory **out);

/**
 * # Safety
 * `theory` must be null or a handle from [`manyarm_theory_new`] not yet freed.
 */
void manyarm_theory_free(ManyarmTheory *theory);

/**
 * Significant rank at time `t`; `relaxed` selects the relaxed complexity.
 *
 * # Safety
 * `theory` must be a live handle and `out` valid for writes.
 */
ManyarmStatus manyarm_theory_eta_star(const ManyarmTheory *theory,
                                      double t,
                                      bool relaxed,
                                      double *out);

/**
 * Sample complexity `S(eta)`, or the relaxed `S~(eta)`.
 *
 * # Safety
 * `theory` must be a live handle and `out` valid for writes.
 */
ManyarmStatus manyarm_theory_sample_complexity(const ManyarmTheory *theory,
                                               double eta,
                                               bool relaxed,
                                               double *out);

/**
 * Closed-form upper bound on the relaxed significant rank at `t`, and the
 * mean at that rank.
 *
 * # Safety
 * `theory` must be a live handle; `rank` and `reward` valid for writes.
 */
ManyarmStatus manyarm_theory_closed_form(const ManyarmTheory *theory,
                                         double t,
                                         double *rank,
                                         double *reward);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MANYARM_H */
