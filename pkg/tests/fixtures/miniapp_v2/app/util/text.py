def clean(s):
    return s.strip()


def normalize(s):
    return clean(clean(s))
