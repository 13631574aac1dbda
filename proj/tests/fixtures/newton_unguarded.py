x = N
assert x * x > N
while x * x > N:
    assert x != (x + N/x) / 2
    x = (x + N/x) / 2
