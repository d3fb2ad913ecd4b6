import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'groupquery.settings')
django.setup()
