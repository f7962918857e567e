class Math {
public:
  int twice(int x){
    return x + x;
  }
};
