#ifndef CQOP_H
#define CQOP_H

/* C interface to the curved-surface quantum operator library.
 *
 * Every call returns a cqop_status. On failure the thread-local message from
 * cqop_last_error() says what went wrong. Strings handed out by the library
 * are released with cqop_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CQOP_BUILDING)
#    define CQOP_API __declspec(dllexport)
#  else
#    define CQOP_API __declspec(dllimport)
#  endif
#else
#  define CQOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cqop_status {
  CQOP_OK = 0,
  CQOP_ERR_INVALID_ARGUMENT = 1,
  CQOP_ERR_PARSE = 2,
  CQOP_ERR_DOMAIN = 3,
  CQOP_ERR_UNSUPPORTED = 4,
  CQOP_ERR_GRID_MISMATCH = 5,
  CQOP_ERR_NUMERIC = 6,
  CQOP_ERR_IO = 7,
  CQOP_ERR_INTERNAL = 8
} cqop_status;

typedef struct cqop_chart cqop_chart;
/* A chart discretized at a fixed resolution with its operators assembled. */
typedef struct cqop_surface cqop_surface;

CQOP_API const char* cqop_last_error(void);
CQOP_API const char* cqop_status_name(cqop_status status);
CQOP_API void cqop_string_free(char* s);

/* kind is "sphere", "cylinder" or "ring"; Lz is read by the cylinder only. */
CQOP_API cqop_status cqop_chart_builtin(const char* kind, double R, double Lz, double hbar, double mass,
                                        cqop_chart** out);
CQOP_API cqop_status cqop_chart_from_json(const char* text, cqop_chart** out);
CQOP_API cqop_status cqop_chart_load(const char* path, cqop_chart** out);
CQOP_API cqop_status cqop_chart_to_json(const cqop_chart* chart, char** out);
/* Writes 1 for the built-in charts, 0 for charts loaded from JSON. */
CQOP_API cqop_status cqop_chart_is_builtin(const cqop_chart* chart, int* out);
CQOP_API void cqop_chart_free(cqop_chart* chart);

/* M, K and the geometric potential at a surface point. */
CQOP_API cqop_status cqop_curvature_at(const cqop_chart* chart, double q1, double q2, double* mean, double* gaussian,
                                       double* potential);
/* JSON with the symbolic expressions and, for custom charts, a table of values
 * on an n x n interior sample grid (constants only for the built-ins). */
CQOP_API cqop_status cqop_curvature_json(const cqop_chart* chart, int n, char** out);

CQOP_API cqop_status cqop_surface_new(const cqop_chart* chart, int n1, int n2, cqop_surface** out);
CQOP_API cqop_status cqop_surface_nodes(const cqop_surface* surface, int* out);
CQOP_API void cqop_surface_free(cqop_surface* surface);

/* Runs the identity suite. tolerances is a JSON object of check id -> value
 * or NULL. Either output pointer may be NULL; failed receives the number of
 * failed checks. */
CQOP_API cqop_status cqop_verify(const cqop_surface* surface, uint64_t seed, const char* tolerances, char** report_json,
                                 char** report_text, int* failed);

/* resolutions holds count (N1, N2) pairs; ids is a comma-separated list of
 * check ids. */
CQOP_API cqop_status cqop_convergence(const cqop_chart* chart, const int* resolutions, int count, uint64_t seed,
                                      const char* ids, char** out);

/* Lowest count eigenvalues of H. analytic may be NULL; it is filled for the
 * built-in charts. */
CQOP_API cqop_status cqop_spectrum(const cqop_surface* surface, int count, double* values, double* analytic);

/* state is JSON: {"kind":"packet","sigma":0.3,"l0":4} or
 * {"kind":"modes","modes":[[l,m],...]}. csv receives the series,
 * summary the drift summary. */
CQOP_API cqop_status cqop_evolve(const cqop_surface* surface, const char* state, double dt, int steps, char** csv,
                                 char** summary);

/* name is one of H, lap, v2, px, py, pz, Lx, Ly, Lz, Fx, Fy, Fz. */
CQOP_API cqop_status cqop_dump_operator(const cqop_surface* surface, const char* name, const char* path);

#ifdef __cplusplus
}
#endif

#endif
