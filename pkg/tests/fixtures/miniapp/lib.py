def retry(n):
    if n <= 0:
        return 0
    return retry(n - 1)


def wrap(value):
    return {"value": value}
