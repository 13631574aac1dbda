x = 0
y = N + 1
while y > x + e:
    if (x + y) / 2 * (x + y) / 2 > N:
        y = (x + y) / 2
    else:
        x = (x + y) / 2
