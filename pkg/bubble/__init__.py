# Bubble analytics: extremal profiles, closed forms and their asymptotics
