# Bolza surface with a two-bump time change of amplitude 0.3.
model = 'bolza'
seed = 1
samples = 10

timechange = Namespace(
    kind='bumps',
    amplitude=0.3,
    centers=[[0.0, 1.0, 0.0], [0.4, 1.5, 2.0]],
    widths=[0.6, 0.4],
)

flow = Namespace(h=0.25, tolerance=1e-11, nodes=16)

verify = Namespace(trials=3, norm_trials=100)

ladder = Namespace(t_values=[1.0, -1.0, 0.5, -0.5], s_max=1e4, rungs=3)

mixing = Namespace(horizon=1e6, s_max=640.0, step=0.5, starts=4)

spectrum = Namespace(source='orbit', s_max=200.0, horizon=2e5, step=0.1, mean_adjust=True)

mourre = Namespace(interval=[1.0, 2.0], t_values=[5.0, 20.0, 80.0])
