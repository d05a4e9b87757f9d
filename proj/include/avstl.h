/* C interface to the AvSTL robustness library.
 *
 * All objects are opaque handles created and destroyed here. Functions
 * return AVSTL_OK on success; on failure they return an error code and leave
 * a message retrievable with avstl_last_error() (thread-local). Output
 * parameters are untouched on failure. Infinite robustness values are
 * reported as +/-HUGE_VAL.
 */
#ifndef AVSTL_H
#define AVSTL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct avstl_trace avstl_trace;
typedef struct avstl_formula avstl_formula;
typedef struct avstl_robustness_signal avstl_robustness_signal;

typedef enum avstl_status {
  AVSTL_OK = 0,
  AVSTL_ERR_INVALID_ARGUMENT = 1,
  AVSTL_ERR_PARSE = 2,
  AVSTL_ERR_IO = 3,
  AVSTL_ERR_UNSUPPORTED_FORMULA = 4,
  AVSTL_ERR_EVAL = 5,
  AVSTL_ERR_INTERNAL = 6
} avstl_status;

const char* avstl_status_name(avstl_status status);

/* Message for the most recent failure on this thread; never NULL. */
const char* avstl_last_error(void);

/* --- traces ------------------------------------------------------------- */

/* CSV with header `time,var1,...`; strictly increasing times starting at 0;
 * values hold until the next row. */
avstl_status avstl_trace_load_csv(const char* path, avstl_trace** out);

/* In-memory construction from row-major samples: values[r*n_vars + v]. */
avstl_status avstl_trace_create(const char* const* names, size_t n_vars, const double* times,
                                size_t n_rows, const double* values, avstl_trace** out);

avstl_status avstl_trace_write_csv(const avstl_trace* trace, const char* path);
double avstl_trace_horizon(const avstl_trace* trace);
void avstl_trace_free(avstl_trace* trace);

/* --- formulas ----------------------------------------------------------- */

avstl_status avstl_formula_parse(const char* text, avstl_formula** out);
/* Canonical text; free with avstl_string_free. */
avstl_status avstl_formula_unparse(const avstl_formula* f, char** out);
int avstl_formula_averaged_depth(const avstl_formula* f);
/* +HUGE_VAL when the formula looks unboundedly far ahead. */
double avstl_formula_horizon(const avstl_formula* f);

/* Rewrites. `path` is a sequence of child indices from the root. */
avstl_status avstl_formula_refine_eventually(const avstl_formula* f, const int* path,
                                             size_t path_len, avstl_formula** out);
avstl_status avstl_formula_refine_always(const avstl_formula* f, const int* path,
                                         size_t path_len, double delta, avstl_formula** out);

void avstl_formula_free(avstl_formula* f);

/* --- evaluation ---------------------------------------------------------- */

avstl_status avstl_evaluate(const avstl_trace* trace, const avstl_formula* f, double* pos,
                            double* neg);

avstl_status avstl_robust_signal(const avstl_trace* trace, const avstl_formula* f,
                                 avstl_robustness_signal** out);

size_t avstl_robustness_signal_size(const avstl_robustness_signal* sig);
/* Segment i: start time, both channel values at the start, both slopes. */
avstl_status avstl_robustness_signal_segment(const avstl_robustness_signal* sig, size_t index,
                                             double* t, double* pos, double* pos_slope,
                                             double* neg, double* neg_slope);
/* CSV columns: time,pos,pos_slope,neg,neg_slope. */
avstl_status avstl_robustness_signal_write_csv(const avstl_robustness_signal* sig,
                                               const char* path);
void avstl_robustness_signal_free(avstl_robustness_signal* sig);

/* --- falsification -------------------------------------------------------- */

/* Runs a falsification experiment described by a JSON configuration and
 * returns the JSON report (free with avstl_string_free). */
avstl_status avstl_falsify_run_json(const char* config_json, char** report_json);

void avstl_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* AVSTL_H */
