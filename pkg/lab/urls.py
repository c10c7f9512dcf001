from django.urls import path

from lab import views

urlpatterns = [
    path('', views.run_list),
    path('<int:pk>/', views.run_view),
    path('<int:pk>/series', views.run_series),
]
