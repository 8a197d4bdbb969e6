# Spectral estimator checks against closed-form correlations.
spectrum = Namespace(source='cosine', s_max=200.0, step=0.1, bandwidth=0.02)

log_config = {
    'version': 1,
    'formatters': {'plain': {'format': '%(levelname)s %(name)s: %(message)s'}},
    'handlers': {'console': {'class': 'logging.StreamHandler', 'formatter': 'plain'}},
    'root': {'level': 'DEBUG', 'handlers': ['console']},
}
