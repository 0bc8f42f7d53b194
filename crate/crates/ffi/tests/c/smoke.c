#include <math.h>
#include <stdio.h>
#include "snspm.h"

int main(void) {
    SnspmParams *p = NULL;
    if (snspm_params_preset("fig8a", &p) != SNSPM_STATUS_OK) return 1;
    double km = 0.0;
    if (snspm_max_distance(p, "real_aopp", 0.0, 1400.0, &km) != SNSPM_STATUS_OK) return 2;
    SnspmRatePoint point;
    if (snspm_rate(p, "real_aopp", 500.0, &point) != SNSPM_STATUS_OK) return 3;
    if (snspm_params_override(p, "mu=-1") != SNSPM_STATUS_DOMAIN) return 4;
    if (snspm_last_error_message() == NULL) return 5;
    snspm_params_free(p);
    printf("%.3f %.6e\n", km, point.rate);
    return fabs(km - 1211.0) < 0.02 * 1211.0 && point.rate > 0.0 ? 0 : 6;
}
