# Bolza surface with the unperturbed flow: every identity has a closed form.
model = 'bolza'
seed = 0
samples = 10

timechange = Namespace(kind='constant', value=1.0)

verify = Namespace(trials=3, pairs=1000)

mourre = Namespace(interval=[1.0, 2.0], t_values=[5.0, 20.0, 80.0])
