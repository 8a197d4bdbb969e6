# Cat map suspension: an exact oracle for the cocycle, s* = lam^t s.
# Mixing, spectrum and Mourre experiments refuse this model.
model = 'suspension'
seed = 0
samples = 10

timechange = Namespace(kind='constant', value=1.0)
